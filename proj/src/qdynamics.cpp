#include "photonstat/qdynamics.hpp"

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "photonstat/error.hpp"

namespace photonstat::qdynamics {

namespace {

constexpr const char* kModule = "qdynamics";
const cplx kI{0.0, 1.0};

/// Excited block A_ee and drive column A_e0 of A = -iH.
struct PinnedSystem {
  CMatrix a_ee;
  CVector a_e0;
  Eigen::FullPivLU<CMatrix> lu;

  explicit PinnedSystem(const CMatrix& h) {
    const Eigen::Index d = h.rows();
    const CMatrix a = -kI * h;
    a_ee = a.bottomRightCorner(d - 1, d - 1);
    a_e0 = a.bottomLeftCorner(d - 1, 1);
    lu.compute(a_ee);
    lu.setThreshold(1e-13);
    if (!lu.isInvertible()) {
      throw Error(Errc::SingularSystem, kModule, "excited-manifold system is singular");
    }
  }

  /// Fixed point of the excited block for vacuum amplitude c0.
  CVector fixed_point(cplx c0) const { return -(lu.solve(a_e0) * c0); }
};

bool is_uniform(const std::vector<double>& t) {
  if (t.size() < 3) return true;
  const double dt = t[1] - t[0];
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (std::abs((t[i] - t[i - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(dt))) return false;
  }
  return dt > 0.0;
}

G2Curve pinned_curve(const CMatrix& h, const QuantumState& start, const std::vector<double>& tau) {
  const PinnedSystem sys(h);
  const int n_max = start.n_max;
  const Eigen::VectorXd na = number_diagonal(n_max, Mode::A);
  const cplx c0 = start.amplitudes(0);
  const CVector xs = sys.fixed_point(c0);
  auto raw = [&](const CVector& excited) {
    // <a+a> of (c0, excited); the vacuum carries no photons.
    return (excited.cwiseAbs2().array() * na.tail(na.size() - 1).array()).sum();
  };
  const double raw_inf = raw(xs);
  if (!(raw_inf > 0.0) || !std::isfinite(raw_inf)) {
    throw Error(Errc::ZeroPhotonNumber, kModule, "no photon population after the jump");
  }
  G2Curve out;
  out.tau = tau;
  out.values.resize(tau.size());
  const CVector dev0 = start.amplitudes.tail(start.amplitudes.size() - 1) - xs;
  if (is_uniform(tau) && !tau.empty()) {
    // March with a single step propagator; the deviation obeys dv/dt = A_ee v.
    CVector dev = (sys.a_ee * tau[0]).exp() * dev0;
    const CMatrix step = tau.size() > 1 ? CMatrix((sys.a_ee * (tau[1] - tau[0])).exp()) : CMatrix();
    for (std::size_t i = 0; i < tau.size(); ++i) {
      if (i > 0) dev = step * dev;
      out.values[i] = raw(xs + dev) / raw_inf;
    }
  } else {
    for (std::size_t i = 0; i < tau.size(); ++i) {
      const CVector dev = (sys.a_ee * tau[i]).exp() * dev0;
      out.values[i] = raw(xs + dev) / raw_inf;
    }
  }
  return out;
}

}  // namespace

bool CavityModelParams::valid() const {
  const bool finite = std::isfinite(coupling_g) && std::isfinite(kappa) && std::isfinite(gamma_b) &&
                      std::isfinite(detuning_a) && std::isfinite(detuning_b) && std::isfinite(drive_eps) &&
                      std::isfinite(kerr_a) && std::isfinite(kerr_b);
  return finite && kappa > 0.0 && gamma_b >= 0.0 && coupling_g >= 0.0 && drive_eps >= 0.0 && n_max >= 2;
}

std::vector<std::pair<int, int>> basis_states(int n_max) {
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(basis_dim(n_max)));
  for (int n = 0; n <= n_max; ++n) {
    for (int nb = 0; nb <= n; ++nb) out.emplace_back(n - nb, nb);
  }
  return out;
}

CMatrix annihilation(int n_max, Mode mode) {
  const int d = basis_dim(n_max);
  CMatrix op = CMatrix::Zero(d, d);
  for (const auto& [na, nb] : basis_states(n_max)) {
    const int col = basis_index(na, nb);
    if (mode == Mode::A && na > 0) op(basis_index(na - 1, nb), col) = std::sqrt(static_cast<double>(na));
    if (mode == Mode::B && nb > 0) op(basis_index(na, nb - 1), col) = std::sqrt(static_cast<double>(nb));
  }
  return op;
}

Eigen::VectorXd number_diagonal(int n_max, Mode mode) {
  Eigen::VectorXd out(basis_dim(n_max));
  for (const auto& [na, nb] : basis_states(n_max)) {
    out(basis_index(na, nb)) = mode == Mode::A ? na : nb;
  }
  return out;
}

CMatrix build_hamiltonian(const CavityModelParams& p) {
  const int d = basis_dim(p.n_max);
  CMatrix h = CMatrix::Zero(d, d);
  for (const auto& [na, nb] : basis_states(p.n_max)) {
    const int i = basis_index(na, nb);
    const double fa = na, fb = nb;
    h(i, i) = cplx(p.detuning_a * fa + p.detuning_b * fb + p.kerr_a * fa * (fa - 1.0) + p.kerr_b * fb * (fb - 1.0),
                   -0.5 * (p.kappa * fa + p.gamma_b * fb));
    // g a+b : |na, nb> -> |na+1, nb-1>, and its conjugate.
    if (nb > 0) {
      const int j = basis_index(na + 1, nb - 1);
      const double m = p.coupling_g * std::sqrt((fa + 1.0) * fb);
      h(j, i) += m;
      h(i, j) += m;
    }
    // eps a+ : |na, nb> -> |na+1, nb>, when it stays inside the truncation.
    if (na + nb < p.n_max) {
      const int j = basis_index(na + 1, nb);
      const double m = p.drive_eps * std::sqrt(fa + 1.0);
      h(j, i) += m;
      h(i, j) += m;
    }
  }
  return h;
}

QuantumState steady_state(const CMatrix& h, const CavityModelParams& p) {
  if (!(p.drive_eps > 0.0)) throw Error(Errc::InvalidParams, kModule, "steady state needs drive_eps > 0");
  const PinnedSystem sys(h);
  QuantumState s;
  s.n_max = p.n_max;
  s.amplitudes.resize(h.rows());
  s.amplitudes(0) = 1.0;
  s.amplitudes.tail(h.rows() - 1) = sys.fixed_point(1.0);
  s.amplitudes /= std::sqrt(s.norm_sq());
  return s;
}

QuantumState apply_annihilation(const QuantumState& s, Mode mode) {
  QuantumState out;
  out.n_max = s.n_max;
  out.amplitudes = CVector::Zero(s.amplitudes.size());
  for (const auto& [na, nb] : basis_states(s.n_max)) {
    const cplx c = s.amplitudes(basis_index(na, nb));
    if (mode == Mode::A && na > 0) out.amplitudes(basis_index(na - 1, nb)) = std::sqrt(double(na)) * c;
    if (mode == Mode::B && nb > 0) out.amplitudes(basis_index(na, nb - 1)) = std::sqrt(double(nb)) * c;
  }
  return out;
}

QuantumState evolve(const QuantumState& s, const CMatrix& h, double t, bool pinned) {
  if (!(t >= 0.0)) throw Error(Errc::InvalidParams, kModule, "evolution time must be >= 0");
  QuantumState out;
  out.n_max = s.n_max;
  if (pinned) {
    const PinnedSystem sys(h);
    const Eigen::Index m = s.amplitudes.size() - 1;
    const CVector xs = sys.fixed_point(s.amplitudes(0));
    out.amplitudes.resize(s.amplitudes.size());
    out.amplitudes(0) = s.amplitudes(0);
    out.amplitudes.tail(m) = xs + (sys.a_ee * t).exp() * (s.amplitudes.tail(m) - xs);
  } else {
    out.amplitudes = (h * (-kI * t)).exp() * s.amplitudes;
  }
  if (!out.amplitudes.allFinite()) throw Error(Errc::ToleranceNotMet, kModule, "non-finite propagator");
  return out;
}

double mean_number(const QuantumState& s, Mode mode) {
  const double n = (s.amplitudes.cwiseAbs2().array() * number_diagonal(s.n_max, mode).array()).sum();
  return n / s.norm_sq();
}

G2Curve g2_from_steady_state(const CMatrix& h, const QuantumState& ss, const std::vector<double>& tau) {
  if (!(mean_number(ss, Mode::A) > 0.0)) throw Error(Errc::ZeroPhotonNumber, kModule, "<a+a> = 0 in steady state");
  return pinned_curve(h, apply_annihilation(ss, Mode::A), tau);
}

G2Curve g2_conditional(const CMatrix& h, const QuantumState& phi, const std::vector<double>& tau) {
  const QuantumState chi = apply_annihilation(phi, Mode::A);
  if (!(chi.norm_sq() > 0.0)) throw Error(Errc::ZeroPhotonNumber, kModule, "chi has zero norm");
  return pinned_curve(h, chi, tau);
}

G2Curve g2_curve(const CavityModelParams& p, const std::vector<double>& tau) {
  const CMatrix h = build_hamiltonian(p);
  return g2_from_steady_state(h, steady_state(h, p), tau);
}

std::vector<double> uniform_grid(double dt, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = dt * static_cast<double>(i);
  return t;
}

}  // namespace photonstat::qdynamics
