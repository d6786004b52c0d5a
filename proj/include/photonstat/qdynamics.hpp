#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

namespace photonstat::qdynamics {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Driven photon mode a coupled to a bosonized material excitation b.
/// Frequencies in rad/ns, rates in 1/ns. The kerr_* terms add
/// kerr_a a+a+aa and kerr_b b+b+bb; with both zero the model is linear
/// and every normalized correlator is identically 1.
struct CavityModelParams {
  double coupling_g = 1.0;
  double kappa = 0.1;
  double gamma_b = 0.1;
  double detuning_a = 0.0;
  double detuning_b = 0.0;
  double drive_eps = 0.01;
  double kerr_a = 0.0;
  double kerr_b = 0.0;
  int n_max = 3;

  bool valid() const;
};

enum class Mode { A, B };

/// Number of states |na, nb> with na + nb <= n_max.
constexpr int basis_dim(int n_max) { return (n_max + 1) * (n_max + 2) / 2; }

/// States ordered by total excitation n, then by nb ascending.
constexpr int basis_index(int na, int nb) {
  const int n = na + nb;
  return n * (n + 1) / 2 + nb;
}

std::vector<std::pair<int, int>> basis_states(int n_max);

struct QuantumState {
  int n_max = 0;
  CVector amplitudes;

  double norm_sq() const { return amplitudes.squaredNorm(); }
  cplx amplitude(int na, int nb) const { return amplitudes(basis_index(na, nb)); }
};

/// Annihilation operator of a mode, restricted to the truncated basis.
CMatrix annihilation(int n_max, Mode mode);

/// Number operator of a mode (diagonal).
Eigen::VectorXd number_diagonal(int n_max, Mode mode);

/// Effective non-Hermitian Hamiltonian restricted to na + nb <= n_max.
CMatrix build_hamiltonian(const CavityModelParams& p);

/// Weak-drive steady state: c00 pinned to 1, excited amplitudes solve
/// (-iHc)_k = 0; the result is normalized to unit norm.
/// SingularSystem when the excited block is singular.
QuantumState steady_state(const CMatrix& h, const CavityModelParams& p);

/// Unnormalized a|psi> or b|psi>.
QuantumState apply_annihilation(const QuantumState& s, Mode mode);

/// e^{-iHt} applied to s. With pinned = true the vacuum amplitude is held
/// fixed and the excited block relaxes toward the driven fixed point,
/// which is the same closure used by steady_state.
QuantumState evolve(const QuantumState& s, const CMatrix& h, double t_ns, bool pinned = true);

double mean_number(const QuantumState& s, Mode mode);

struct G2Curve {
  std::vector<double> tau;
  std::vector<double> values;
};

/// g2(tau) after a photon jump from the steady state, normalized by the
/// tau -> infinity limit of the pinned evolution.
G2Curve g2_from_steady_state(const CMatrix& h, const QuantumState& ss, const std::vector<double>& tau);

/// Same construction started from chi = a phi.
G2Curve g2_conditional(const CMatrix& h, const QuantumState& phi, const std::vector<double>& tau);

/// Convenience: build H, steady state and the g2 curve.
G2Curve g2_curve(const CavityModelParams& p, const std::vector<double>& tau);

/// Uniform grid 0, dt, ..., (n-1) dt.
std::vector<double> uniform_grid(double dt, std::size_t n);

}  // namespace photonstat::qdynamics
