#include "photonstat/photonsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unsupported/Eigen/MatrixFunctions>

#include "photonstat/error.hpp"
#include "photonstat/parallel.hpp"
#include "photonstat/rng.hpp"

namespace photonstat::photonsim {

namespace {

constexpr const char* kModule = "photonsim";
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_sampling(const MultimodeParams& p, double dt) {
  if (!p.valid()) throw Error(Errc::InvalidParams, kModule, "invalid multimode parameters");
  if (!(dt > 0.0) || kTwoPi / p.omega < 20.0 * dt) {
    throw Error(Errc::InvalidSampling, kModule, "need at least 20 samples per modulation period");
  }
}

/// Phase samples phi(t0 + i dt), i = 0..n, starting from phi0.
std::vector<double> phase_path(double phi0, std::size_t n, double dt, double diffusion, Engine& eng) {
  std::vector<double> phi(n + 1);
  phi[0] = phi0;
  const double sd = std::sqrt(2.0 * diffusion * dt);
  for (std::size_t i = 1; i <= n; ++i) phi[i] = phi[i - 1] + (diffusion > 0.0 ? sd * standard_normal(eng) : 0.0);
  return phi;
}

}  // namespace

std::vector<double> MultimodeParams::offsets() const {
  if (!phase_offsets.empty()) return phase_offsets;
  std::vector<double> out(static_cast<std::size_t>(std::max(n_modes, 0)));
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = kTwoPi * static_cast<double>(k) / n_modes;
  return out;
}

bool MultimodeParams::valid() const {
  if (n_modes < 1 || !(total_intensity > 0.0) || !(mod_depth >= 0.0 && mod_depth <= 1.0)) return false;
  if (!(omega > 0.0) || !(diffusion >= 0.0)) return false;
  return phase_offsets.empty() || phase_offsets.size() == static_cast<std::size_t>(n_modes);
}

std::vector<double> IntensityTrace::sum(const std::vector<int>& modes) const {
  std::vector<double> out(size(), 0.0);
  for (int m : modes) {
    const auto& s = samples.at(static_cast<std::size_t>(m));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += s[i];
  }
  return out;
}

IntensityTrace multimode_intensity(const MultimodeParams& p, double duration, double dt) {
  check_sampling(p, dt);
  if (!(duration > 0.0)) throw Error(Errc::InvalidSampling, kModule, "duration must be positive");
  const auto n = static_cast<std::size_t>(std::ceil(duration / dt));
  Engine eng = make_engine(p.seed, 0);
  const auto phi = phase_path(0.0, n, dt, p.diffusion, eng);
  const auto off = p.offsets();
  IntensityTrace tr;
  tr.dt = dt;
  tr.samples.assign(off.size(), std::vector<double>(n));
  const double base = p.total_intensity / p.n_modes;
  for (std::size_t k = 0; k < off.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) * dt;
      tr.samples[k][i] = base * (1.0 + p.mod_depth * std::cos(p.omega * t + phi[i] + off[k]));
    }
  }
  return tr;
}

EventStream sample_cox(const std::vector<double>& intensity, double dt, std::uint64_t seed, std::uint64_t resolution_ps,
                       std::uint8_t channel) {
  EventStream out;
  out.resolution_ps = resolution_ps;
  out.channel = channel;
  if (intensity.empty()) return out;
  const double t_end = static_cast<double>(intensity.size() - 1) * dt;
  out.duration = ns_to_ticks(t_end, resolution_ps);
  const double i_max = *std::max_element(intensity.begin(), intensity.end());
  if (!(i_max > 0.0)) return out;
  Engine eng = make_engine(seed, 0);
  for (double t = exponential(eng, i_max); t < t_end; t += exponential(eng, i_max)) {
    const double x = t / dt;
    const auto i = static_cast<std::size_t>(x);
    const double f = x - static_cast<double>(i);
    const double v = intensity[i] * (1.0 - f) + intensity[std::min(i + 1, intensity.size() - 1)] * f;
    if (uniform01(eng) * i_max < v) out.timestamps.push_back(ns_to_ticks(t, resolution_ps));
  }
  return out;
}

std::vector<EventStream> simulate_multimode(const MultimodeParams& p, double duration, double dt,
                                            std::uint64_t resolution_ps, double segment_ns) {
  check_sampling(p, dt);
  if (!(duration > 0.0) || !(segment_ns > 0.0)) throw Error(Errc::InvalidSampling, kModule, "bad duration");
  const auto n_seg = static_cast<std::size_t>(std::ceil(duration / segment_ns));
  auto seg_begin = [&](std::size_t s) { return static_cast<double>(s) * segment_ns; };
  auto seg_end = [&](std::size_t s) { return std::min(duration, static_cast<double>(s + 1) * segment_ns); };
  auto seg_steps = [&](std::size_t s) {
    return static_cast<std::size_t>(std::ceil((seg_end(s) - seg_begin(s)) / dt));
  };

  // Pass 1: total phase drift of each segment, so segments can start from the
  // correct phase and run independently.
  std::vector<double> drift(n_seg, 0.0);
  if (p.diffusion > 0.0) {
    parallel_for(n_seg, [&](std::size_t s) {
      Engine eng = make_engine(p.seed, 2 * s);
      const auto phi = phase_path(0.0, seg_steps(s), dt, p.diffusion, eng);
      // the last sample lies at or beyond the segment end; interpolate to it
      const double x = (seg_end(s) - seg_begin(s)) / dt;
      const auto i = std::min(static_cast<std::size_t>(x), phi.size() - 2);
      const double f = x - static_cast<double>(i);
      drift[s] = phi[i] * (1.0 - f) + phi[i + 1] * f;
    });
  }
  std::vector<double> start(n_seg, 0.0);
  for (std::size_t s = 1; s < n_seg; ++s) start[s] = start[s - 1] + drift[s - 1];

  const auto off = p.offsets();
  const std::size_t n_modes = off.size();
  const double base = p.total_intensity / p.n_modes;
  const double i_max = base * (1.0 + p.mod_depth);
  std::vector<std::vector<std::vector<std::uint64_t>>> parts(n_seg, std::vector<std::vector<std::uint64_t>>(n_modes));
  parallel_for(n_seg, [&](std::size_t s) {
    Engine phase_eng = make_engine(p.seed, 2 * s);
    const auto phi = phase_path(start[s], seg_steps(s), dt, p.diffusion, phase_eng);
    Engine eng = make_engine(p.seed, 2 * s + 1);
    const double t0 = seg_begin(s), t1 = seg_end(s);
    for (std::size_t k = 0; k < n_modes; ++k) {
      auto& out = parts[s][k];
      for (double t = t0 + exponential(eng, i_max); t < t1; t += exponential(eng, i_max)) {
        const double x = (t - t0) / dt;
        const auto i = std::min(static_cast<std::size_t>(x), phi.size() - 2);
        const double f = x - static_cast<double>(i);
        const double ph = phi[i] * (1.0 - f) + phi[i + 1] * f;
        const double v = base * (1.0 + p.mod_depth * std::cos(p.omega * t + ph + off[k]));
        if (uniform01(eng) * i_max < v) out.push_back(ns_to_ticks(t, resolution_ps));
      }
    }
  });

  std::vector<EventStream> streams(n_modes);
  for (std::size_t k = 0; k < n_modes; ++k) {
    auto& st = streams[k];
    st.resolution_ps = resolution_ps;
    st.channel = static_cast<std::uint8_t>(k);
    st.duration = ns_to_ticks(duration, resolution_ps);
    std::size_t total = 0;
    for (std::size_t s = 0; s < n_seg; ++s) total += parts[s][k].size();
    st.timestamps.reserve(total);
    for (std::size_t s = 0; s < n_seg; ++s) {
      st.timestamps.insert(st.timestamps.end(), parts[s][k].begin(), parts[s][k].end());
      std::vector<std::uint64_t>().swap(parts[s][k]);
    }
  }
  return streams;
}

TrajectoryResult quantum_trajectory(const qdynamics::CavityModelParams& p, double duration, std::uint64_t seed,
                                    const TrajectoryOptions& opt) {
  using namespace qdynamics;
  if (!p.valid()) throw Error(Errc::InvalidParams, kModule, "invalid cavity parameters");
  if (!(duration > 0.0) || !(opt.time_tolerance_ns > 0.0)) throw Error(Errc::InvalidParams, kModule, "bad duration");
  const CMatrix h = build_hamiltonian(p);
  const int d = basis_dim(p.n_max);
  CVector psi0 = CVector::Zero(d);
  psi0(0) = 1.0;
  if (p.drive_eps > 0.0) psi0 = steady_state(h, p).amplitudes;

  const double h0 = opt.time_tolerance_ns;
  // Propagators over h0 * 2^k, up to steps of about 64 ns.
  int levels = 0;
  while (h0 * std::ldexp(1.0, levels) < 64.0 && levels < 60) ++levels;
  std::vector<CMatrix> prop(static_cast<std::size_t>(levels) + 1);
  for (int k = 0; k <= levels; ++k) prop[k] = (h * qdynamics::cplx(0.0, -h0 * std::ldexp(1.0, k))).exp();

  const Eigen::VectorXd na = number_diagonal(p.n_max, Mode::A);
  const Eigen::VectorXd nb = number_diagonal(p.n_max, Mode::B);
  const CMatrix a_op = annihilation(p.n_max, Mode::A);
  const CMatrix b_op = annihilation(p.n_max, Mode::B);

  const std::size_t n_seg = opt.segments > 0 ? opt.segments : static_cast<std::size_t>(std::max(1.0, std::ceil(duration / 1e6)));
  const double seg_len = duration / static_cast<double>(n_seg);
  const double slowest = std::min(p.kappa, p.gamma_b > 0.0 ? p.gamma_b : p.kappa);
  const double burn = opt.burn_in_ns >= 0.0 ? opt.burn_in_ns : 20.0 / slowest;
  const auto burn_steps = static_cast<std::uint64_t>(std::llround(burn / h0));
  const auto end_steps = burn_steps + static_cast<std::uint64_t>(std::llround(seg_len / h0));

  struct Part {
    std::vector<std::uint64_t> photons, excitations;
    std::uint64_t jumps = 0;
  };
  std::vector<Part> parts(n_seg);
  parallel_for(n_seg, [&](std::size_t s) {
    Engine eng = make_engine(seed, s);
    Part& part = parts[s];
    CVector psi = psi0;
    CVector trial(d);
    std::uint64_t n = 0;
    bool done = false;
    while (!done) {
      const double r = uniform01_open(eng);
      // Largest steps while the norm stays above r, then bisect down to h0.
      for (int k = levels; k >= 0 && !done;) {
        const std::uint64_t span = std::uint64_t{1} << k;
        trial.noalias() = prop[k] * psi;
        if (trial.squaredNorm() > r) {
          psi.swap(trial);
          n += span;
          if (n >= end_steps) done = true;
          if (k < levels) --k;
        } else {
          --k;
        }
      }
      if (done) break;
      // The jump lies within the next h0.
      psi = prop[0] * psi;
      n += 1;
      if (n >= end_steps) break;
      const double pa = p.kappa * (psi.cwiseAbs2().array() * na.array()).sum();
      const double pb = p.gamma_b * (psi.cwiseAbs2().array() * nb.array()).sum();
      if (!(pa + pb > 0.0)) break;  // nothing left to emit
      const bool photon = uniform01(eng) * (pa + pb) < pa;
      psi = photon ? CVector(a_op * psi) : CVector(b_op * psi);
      psi /= psi.norm();
      ++part.jumps;
      if (n >= burn_steps) {
        const double t = static_cast<double>(s) * seg_len + static_cast<double>(n - burn_steps) * h0;
        (photon ? part.photons : part.excitations).push_back(ns_to_ticks(t, opt.resolution_ps));
      }
    }
  });

  TrajectoryResult res;
  for (auto* st : {&res.photons, &res.excitations}) {
    st->resolution_ps = opt.resolution_ps;
    st->duration = ns_to_ticks(duration, opt.resolution_ps);
  }
  res.excitations.channel = 1;
  for (auto& part : parts) {
    res.photons.timestamps.insert(res.photons.timestamps.end(), part.photons.begin(), part.photons.end());
    res.excitations.timestamps.insert(res.excitations.timestamps.end(), part.excitations.begin(),
                                      part.excitations.end());
    res.n_jumps += part.jumps;
  }
  return res;
}

}  // namespace photonstat::photonsim
