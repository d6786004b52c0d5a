#pragma once

#include <cstdint>
#include <vector>

#include "photonstat/event_stream.hpp"
#include "photonstat/qdynamics.hpp"

namespace photonstat::photonsim {

/// Antiphase multimode intensity model:
/// I_k(t) = (I0/N) (1 + m cos(omega t + phi(t) + offset_k)), phi a Wiener phase
/// with variance 2 D t. Default offsets are 2 pi k / N, for which the sum over
/// all modes is constant.
struct MultimodeParams {
  int n_modes = 7;
  double total_intensity = 1.0;  ///< counts/ns
  double mod_depth = 1.0;
  double omega = 0.6283185307179586;  ///< rad/ns
  std::vector<double> phase_offsets;  ///< empty means the default 2 pi k / N
  double diffusion = 0.0;             ///< 1/ns
  std::uint64_t seed = 1;

  std::vector<double> offsets() const;
  bool valid() const;
};

struct IntensityTrace {
  double dt = 0.0;                           ///< ns
  std::vector<std::vector<double>> samples;  ///< [mode][sample], counts/ns

  std::size_t size() const { return samples.empty() ? 0 : samples.front().size(); }
  /// Sum over the selected modes, per sample.
  std::vector<double> sum(const std::vector<int>& modes) const;
};

/// Sampled intensities on [0, duration). InvalidSampling if fewer than 20
/// samples per modulation period.
IntensityTrace multimode_intensity(const MultimodeParams& p, double duration_ns, double dt_ns);

/// Inhomogeneous Poisson sampling of a sampled intensity (linear interpolation
/// between samples) by thinning against its maximum.
EventStream sample_cox(const std::vector<double>& intensity, double dt_ns, std::uint64_t seed,
                       std::uint64_t resolution_ps = 1, std::uint8_t channel = 0);

/// One event stream per mode over [0, duration). Time is split into segments of
/// `segment_ns`; segment s draws its phase increments from derive_seed(seed, 2s)
/// and its photons from derive_seed(seed, 2s + 1). The phase is continued across
/// segments, and thinning evaluates the cosine exactly with the phase linearly
/// interpolated between dt samples, so D = 0 streams carry no sampling error.
std::vector<EventStream> simulate_multimode(const MultimodeParams& p, double duration_ns, double dt_ns = 0.5,
                                            std::uint64_t resolution_ps = 1, double segment_ns = 1e5);

struct TrajectoryOptions {
  std::uint64_t resolution_ps = 1;
  double time_tolerance_ns = 1e-6;  ///< jump-time location accuracy
  std::size_t segments = 0;         ///< independent trajectories; 0 picks one per ~1e6 ns
  double burn_in_ns = -1.0;         ///< discarded start of each trajectory; < 0 means 20 / min(kappa, gamma)
};

struct TrajectoryResult {
  EventStream photons;      ///< jumps of sqrt(kappa) a
  EventStream excitations;  ///< jumps of sqrt(gamma) b
  std::uint64_t n_jumps = 0;
};

/// Monte Carlo wavefunction unravelling of the full effective Hamiltonian (no
/// pinning). The duration is shared among independent trajectories, each
/// seeded by derive_seed(seed, index) and started from the steady state.
TrajectoryResult quantum_trajectory(const qdynamics::CavityModelParams& p, double duration_ns, std::uint64_t seed,
                                    const TrajectoryOptions& opt = {});

}  // namespace photonstat::photonsim
