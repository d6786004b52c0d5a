// Acceptance run: one PASS/FAIL line per criterion. Criterion numbers given on
// the command line restrict the run to those.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "photonstat/config.hpp"
#include "photonstat/corrmodel.hpp"
#include "photonstat/detection.hpp"
#include "photonstat/estimators.hpp"
#include "photonstat/fitters.hpp"
#include "photonstat/formats.hpp"
#include "photonstat/photonsim.hpp"
#include "photonstat/pipeline.hpp"
#include "photonstat/qdynamics.hpp"

#ifndef PHOTONSTAT_CONFIG_DIR
#define PHOTONSTAT_CONFIG_DIR "configs"
#endif

using namespace photonstat;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

int g_failures = 0;

void verdict(const std::string& id, bool pass, const std::string& what) {
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", id.c_str(), what.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void info(const std::string& id, const std::string& what) {
  std::printf("INFO %s: %s\n", id.c_str(), what.c_str());
  std::fflush(stdout);
}

template <typename... Args>
std::string str(const Args&... args) {
  std::ostringstream os;
  os.precision(4);
  (os << ... << args);
  return os.str();
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

cli::RunConfig config(const std::string& name) {
  return cli::parse_config(std::string(PHOTONSTAT_CONFIG_DIR) + "/" + name);
}

/// Largest |value - model| / stderr over bins with data.
double max_z(const Correlogram& c, const std::function<double(double)>& model) {
  double z = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.stderr_[i] > 0.0) z = std::max(z, std::abs(c.values[i] - model(c.lag_ns[i])) / c.stderr_[i]);
  }
  return z;
}

double max_dev(const Correlogram& c, double level) {
  double d = 0.0;
  for (double v : c.values) d = std::max(d, std::abs(v - level));
  return d;
}

/// Bin average of f over [t - w/2, t + w/2] on `nodes` midpoints.
double bin_average(const std::function<double(double)>& f, double t, double w, int nodes = 8) {
  double s = 0.0;
  for (int k = 0; k < nodes; ++k) s += f(t - 0.5 * w + (k + 0.5) * w / nodes);
  return s / nodes;
}

std::size_t nearest_bin(const Correlogram& c, double lag) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (std::abs(c.lag_ns[i] - lag) < std::abs(c.lag_ns[best] - lag)) best = i;
  }
  return best;
}

Correlogram fit_ready(Correlogram c) {
  double floor = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.counts[i] > 0 && c.stderr_[i] > 0.0) floor = std::max(floor, c.values[i] / std::sqrt(double(c.counts[i])));
  }
  for (auto& e : c.stderr_) {
    if (!(e > 0.0)) e = floor > 0.0 ? floor : 1.0;
  }
  return c;
}

corrmodel::HarmonicG2Params fit_g2_params(const Correlogram& g2, int k) {
  const auto data = fit_ready(g2);
  const auto s = estimators::fourier_spectrum(data, k);
  if (!s.found) throw std::runtime_error("g2 has no oscillation");
  return fitters::g2_params(fitters::fit_g2(data, k, fitters::initial_g2_guess(data, k, s.fundamental)));
}

/// Conditional g3 slice at a delay centred on `delta`.
Correlogram g3_slice(const EventStream& s, double delta, double delta_bin, double tau_bin, double tau_max) {
  estimators::G3Binning b;
  b.delta_lo = std::max(0.0, delta - 0.5 * delta_bin);
  b.delta_bin = delta_bin;
  b.tau_bin = tau_bin;
  b.tau_max = tau_max;
  return estimators::estimate_g3_map(s, s, s, b).conditional_slice(0);
}

fitters::DiscriminationReport discriminate_at(const Correlogram& slice, const corrmodel::HarmonicG2Params& g2,
                                              double delta, double window) {
  fitters::DeltaScan scan;
  scan.delta_max = 3.0 * delta;
  scan.delta_window = window;
  return fitters::discriminate(fit_ready(slice), g2, scan);
}

const char* preferred_name(const fitters::DiscriminationReport& d) {
  return d.preferred == fitters::Preferred::Quantum_Eq8 ? "Eq8" : "Eq5";
}

EventStream poisson(double rate, double duration, std::uint64_t seed) {
  photonsim::MultimodeParams p;
  p.n_modes = 1;
  p.total_intensity = rate;
  p.mod_depth = 0.0;
  p.seed = seed;
  return photonsim::simulate_multimode(p, duration).front();
}

// --- criteria --------------------------------------------------------------

void criterion_1() {
  Stopwatch sw;
  const double rate = 0.5, duration = 2e6;  // 1e6 events per stream
  const auto a = poisson(rate, duration, 101), b = poisson(rate, duration, 102), c = poisson(rate, duration, 103);
  const auto auto_g2 = estimators::estimate_g2(a, a, 1.0, 20.0);
  const auto cross_g2 = estimators::estimate_cross_g2(a, b, 1.0, 20.0);
  estimators::G3Binning bins;
  bins.delta_lo = 0.0;
  bins.delta_bin = 2.0;
  bins.n_delta = 5;
  bins.tau_bin = 1.0;
  bins.tau_max = 20.0;
  const auto map = estimators::estimate_g3_map(a, b, c, bins);
  double g3_dev = 0.0;
  std::size_t cells = 0;
  for (const auto& row : map.values) {
    for (double v : row) {
      g3_dev = std::max(g3_dev, std::abs(v - 1.0));
      ++cells;
    }
  }
  const double g2_dev = std::max(max_dev(auto_g2, 1.0), max_dev(cross_g2, 1.0));
  const double t = sw.seconds();
  verdict("C1", g2_dev <= 0.03 && g3_dev <= 0.03 && t < 30.0,
          str("Poisson streams of ", a.size(), "/", b.size(), "/", c.size(), " events: max |g2-1| = ", g2_dev, " over ",
              auto_g2.size() + cross_g2.size(), " bins, max |g3-1| = ", g3_dev, " over ", cells,
              " cells (tol 0.03), ", t, " s (limit 30)"));
}

void criterion_2() {
  Stopwatch sw;
  photonsim::MultimodeParams p;
  p.n_modes = 1;
  p.total_intensity = 1.0;
  p.mod_depth = 1.0;
  p.diffusion = 0.0;
  p.seed = 21;
  const double duration = 1e7, bin = 0.1;
  const auto s = photonsim::simulate_multimode(p, duration).front();
  const auto g2 = estimators::estimate_g2(s, s, bin, 6.0);
  const double t = sw.seconds();

  // closed form, averaged over the bin
  const auto closed = [&](double tau) {
    return bin_average([&](double x) { return 1.0 + 0.5 * p.mod_depth * p.mod_depth * std::cos(p.omega * x); }, tau,
                       bin);
  };
  // the same moments taken directly from a sampled intensity trace
  const double dt = 0.01;
  const auto trace = photonsim::multimode_intensity(p, 2e4, dt).samples.front();
  const auto trace_g2 = [&](double tau) {
    const auto k = static_cast<std::size_t>(std::llround(tau / dt));
    double num = 0.0, mean = 0.0;
    const std::size_t n = trace.size() - k;
    for (std::size_t i = 0; i < n; ++i) {
      num += trace[i] * trace[i + k];
      mean += trace[i];
    }
    mean /= static_cast<double>(n);
    return num / static_cast<double>(n) / (mean * mean);
  };

  const double half = kPi / p.omega;
  const std::size_t i0 = nearest_bin(g2, 0.0), ih = nearest_bin(g2, half);
  const double z0 = std::abs(g2.values[i0] - closed(g2.lag_ns[i0])) / g2.stderr_[i0];
  const double zh = std::abs(g2.values[ih] - closed(g2.lag_ns[ih])) / g2.stderr_[ih];
  const double zt0 = std::abs(g2.values[i0] - trace_g2(g2.lag_ns[i0])) / g2.stderr_[i0];
  const double zth = std::abs(g2.values[ih] - trace_g2(g2.lag_ns[ih])) / g2.stderr_[ih];
  const double zc0 = std::abs(g2.values[i0] - 1.5) / g2.stderr_[i0];
  const double zch = std::abs(g2.values[ih] - 0.5) / g2.stderr_[ih];
  const double zmax = std::max({z0, zh, zt0, zth, zc0, zch});
  verdict("C2", zmax <= 3.0 && t < 120.0,
          str("Cox m=1 D=0, ", s.size(), " events: g2(0) = ", g2.values[i0], " +- ", g2.stderr_[i0], ", g2(pi/Omega) = ",
              g2.values[ih], " +- ", g2.stderr_[ih], "; z vs 1.5/0.5 = ", zc0, "/", zch, ", vs closed form = ", z0, "/",
              zh, ", vs trace = ", zt0, "/", zth, " (tol 3), ", t, " s (limit 120)"));
}

/// Visibility over one modulation period with an error from the extreme bins.
std::pair<double, double> visibility_with_error(const Correlogram& c, double period) {
  const auto v = corrmodel::visibility(c, {0.0, period});
  const std::size_t imax = nearest_bin(c, 0.0);
  std::size_t ia = imax, ib = imax;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.lag_ns[i] < 0.0 || c.lag_ns[i] > period) continue;
    if (c.values[i] == v.g2_max) ia = i;
    if (c.values[i] == v.g2_min) ib = i;
  }
  const double s = v.g2_max + v.g2_min;
  const double err = 2.0 * std::hypot(v.g2_min * c.stderr_[ia], v.g2_max * c.stderr_[ib]) / (s * s);
  return {v.v, err};
}

void criterion_3() {
  auto cfg = config("antiphase.toml");
  auto p = cfg.laser;
  p.seed = cfg.run.seed;
  const double duration = 1e7;
  const double bin = cfg.acquisition.bin, max_lag = cfg.acquisition.max_lag;
  const double period = 2.0 * kPi / p.omega;
  const auto modes = photonsim::simulate_multimode(p, duration);

  // (a) the summed intensity is constant
  const auto all = merge_streams(modes, 0);
  const auto g_all = estimators::estimate_g2(all, all, bin, max_lag);
  const double z_all = max_z(g_all, [](double) { return 1.0; });
  verdict("C3a", z_all <= 3.0,
          str("sum of ", p.n_modes, " modes (", all.size(), " events): max |g2-1|/sigma = ", z_all, " over ",
              g_all.size(), " bins (tol 3)"));

  // (b) and (c): visibility of the first k modes summed
  std::vector<std::pair<double, double>> vis;
  for (int k = 1; k <= p.n_modes; ++k) {
    const auto s = merge_streams(std::vector<EventStream>(modes.begin(), modes.begin() + k), 0);
    vis.push_back(visibility_with_error(estimators::estimate_g2(s, s, bin, period), period));
  }
  const double v_expected = 0.5 * p.mod_depth * p.mod_depth;
  verdict("C3b", std::abs(vis[0].first - v_expected) <= 0.02,
          str("single-mode visibility ", vis[0].first, " +- ", vis[0].second, ", expected ", v_expected, " +- 0.02"));
  bool monotone = true;
  std::string seq;
  for (std::size_t k = 0; k < vis.size(); ++k) {
    seq += (k ? " " : "") + str(vis[k].first);
    if (k > 0 && vis[k].first > vis[k - 1].first + std::hypot(vis[k].second, vis[k - 1].second)) monotone = false;
  }
  verdict("C3c", monotone, str("visibility for 1..", p.n_modes, " summed modes: ", seq));

  // (d) phase of each cross correlogram from a linear fit at the known frequency
  const auto offsets = p.offsets();
  const double tol_deg = 5.0;
  double worst = 0.0;
  std::string phases;
  for (int k = 1; k < p.n_modes; ++k) {
    const auto x = estimators::estimate_cross_g2(modes[0], modes[k], bin, period);
    Eigen::MatrixXd a(x.size(), 2);
    Eigen::VectorXd y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double w = 1.0 / x.stderr_[i];
      a(i, 0) = w * std::cos(p.omega * x.lag_ns[i]);
      a(i, 1) = w * std::sin(p.omega * x.lag_ns[i]);
      y(i) = w * (x.values[i] - 1.0);
    }
    const Eigen::Vector2d cs = a.colPivHouseholderQr().solve(y);
    // g2 - 1 = A cos(Omega tau + phi) with tau = t_k - t_0
    const double phi = std::atan2(-cs(1), cs(0));
    const double expected = offsets[k] - offsets[0];
    const double diff = std::remainder(phi - expected, 2.0 * kPi) * 180.0 / kPi;
    worst = std::max(worst, std::abs(diff));
    phases += str(k ? " " : "", std::remainder(phi, 2.0 * kPi) * 180.0 / kPi);
  }
  verdict("C3d", worst <= tol_deg,
          str("cross phases (deg) of modes 1..6 against mode 0:", phases, "; worst error ", worst, " deg = ",
              worst / 360.0 * period, " ns (tol 5 deg = ", tol_deg / 360.0 * period, " ns)"));
}

qdynamics::G2Curve binned_model(const qdynamics::CavityModelParams& p, const Correlogram& c, int nodes = 5) {
  std::vector<double> taus;
  for (double lag : c.lag_ns) {
    for (int k = 0; k < nodes; ++k) {
      taus.push_back(std::abs(lag - 0.5 * c.bin_width_ns + (k + 0.5) * c.bin_width_ns / nodes));
    }
  }
  const auto fine = qdynamics::g2_curve(p, taus);
  qdynamics::G2Curve out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    double s = 0.0;
    for (int k = 0; k < nodes; ++k) s += fine.values[i * nodes + k];
    out.tau.push_back(c.lag_ns[i]);
    out.values.push_back(s / nodes);
  }
  return out;
}

void criterion_4() {
  const auto cfg = config("crosscheck.toml");
  const auto& acq = cfg.acquisition;
  auto traj = photonsim::quantum_trajectory(cfg.quantum, cfg.run.duration, cfg.run.seed);
  const auto g2 = estimators::estimate_g2(traj.photons, traj.photons, acq.bin, acq.max_lag);
  const auto model = binned_model(cfg.quantum, g2);
  double z = 0.0;
  for (std::size_t i = 0; i < g2.size(); ++i) z = std::max(z, std::abs(g2.values[i] - model.values[i]) / g2.stderr_[i]);
  verdict("C4", traj.photons.size() >= 100000 && z <= 3.0,
          str("trajectory with ", traj.photons.size(), " photons against the amplitude model: max |z| = ", z, " over ",
              g2.size(), " bins (tol 3)"));

  // Uncoupled and linear: a coherent state in mode a. The amplitude model is
  // exact only as the drive goes to zero (its error is of order <n>), so the
  // drive is halved; n_max = 4 keeps truncation out of the trajectory.
  auto p0 = cfg.quantum;
  p0.coupling_g = 0.0;
  p0.kerr_a = 0.0;
  p0.drive_eps = 0.05;
  p0.n_max = 4;
  const double rate0 = p0.kappa * std::pow(2.0 * p0.drive_eps / p0.kappa, 2);
  traj = photonsim::quantum_trajectory(p0, 1.5e6 / rate0, cfg.run.seed + 1);
  const auto g0 = estimators::estimate_g2(traj.photons, traj.photons, 2.0, acq.max_lag);
  const auto m0 = qdynamics::g2_curve(p0, qdynamics::uniform_grid(0.25, 41));
  const double dev_sim = max_dev(g0, 1.0);
  double dev_model = 0.0;
  for (double v : m0.values) dev_model = std::max(dev_model, std::abs(v - 1.0));
  verdict("C4g0", dev_sim <= 0.03 && dev_model <= 0.03,
          str("g = 0, linear, <n> = ", std::pow(2.0 * p0.drive_eps / p0.kappa, 2), ": trajectory (", traj.photons.size(), " photons) max |g2-1| = ", dev_sim, ", model max |g2-1| = ",
              dev_model, " (tol 0.03)"));
}

void criterion_5() {
  auto p = config("harmonics.toml").quantum;
  const auto grid = qdynamics::uniform_grid(0.1, 3001);
  const auto ratio = [&](int n_max) {
    p.n_max = n_max;
    const auto g = qdynamics::g2_curve(p, grid);
    Correlogram c;
    c.lag_ns = g.tau;
    c.values = g.values;
    c.stderr_.assign(g.tau.size(), 0.0);
    c.counts.assign(g.tau.size(), 0);
    c.bin_width_ns = 0.1;
    const auto s = estimators::fourier_spectrum(c, 4);
    if (!s.found) return -1.0;
    return s.harmonic_amps[2] / s.harmonic_amps[0];
  };
  const double r2 = ratio(2), r3 = ratio(3);
  verdict("C5", r2 >= 0.0 && r2 < 0.01 && r3 > 0.01,
          str("third/fundamental amplitude: n_max=2 -> ", r2, " (< 0.01), n_max=3 -> ", r3, " (> 0.01)"));
}

struct Source {
  std::string name;
  EventStream stream;
  corrmodel::HarmonicG2Params g2;
  double envelope = 0.0;  ///< ns
  double delta_bin = 0.0;
  double tau_bin = 0.0;
  double tau_max = 0.0;
  cli::RunConfig cfg;
};

const Source& blockade_source() {
  static const Source src = [] {
    Source s;
    s.name = "quantum";
    s.cfg = config("blockade.toml");
    s.stream = photonsim::quantum_trajectory(s.cfg.quantum, s.cfg.run.duration, s.cfg.run.seed).photons;
    const auto& acq = s.cfg.acquisition;
    s.g2 = fit_g2_params(estimators::estimate_g2(s.stream, s.stream, acq.bin, acq.max_lag), 2);
    s.envelope = 1.0 / s.g2.decay_rate;
    s.delta_bin = acq.bin;
    s.tau_bin = acq.bin;
    s.tau_max = acq.max_lag;
    return s;
  }();
  return src;
}

const Source& cox_source() {
  static const Source src = [] {
    Source s;
    s.name = "Cox";
    s.cfg = config("cox.toml");
    auto p = s.cfg.laser;
    p.seed = s.cfg.run.seed;
    s.stream = photonsim::simulate_multimode(p, s.cfg.run.duration).front();
    const auto& acq = s.cfg.acquisition;
    s.g2 = fit_g2_params(estimators::estimate_g2(s.stream, s.stream, acq.bin, acq.max_lag), 2);
    s.envelope = 1.0 / s.g2.decay_rate;
    s.delta_bin = 1.0;
    s.tau_bin = acq.bin;
    s.tau_max = acq.max_lag;
    return s;
  }();
  return src;
}

fitters::DiscriminationReport discriminate_source(const Source& s, double delta) {
  const auto slice = g3_slice(s.stream, delta, s.delta_bin, s.tau_bin, s.tau_max);
  return discriminate_at(slice, s.g2, delta, s.delta_bin);
}

void criterion_6() {
  for (const Source* s : {&blockade_source(), &cox_source()}) {
    const double delta = 10.0 * s->envelope;
    const auto d = discriminate_source(*s, delta);
    verdict("C6", d.ratio >= 0.9 && d.ratio <= 1.1,
            str(s->name, " source, delta = ", delta, " ns (10 envelope times of ", s->envelope,
                " ns): residual ratio Eq5/Eq8 = ", d.ratio, " (range [0.9, 1.1])"));
  }
}

void criterion_7() {
  const auto& q = blockade_source();
  const double delta = q.envelope;
  const auto d = discriminate_source(q, delta);
  verdict("C7q", d.preferred == fitters::Preferred::Quantum_Eq8 && d.ratio > 1.5,
          str("quantum source (", q.stream.size(), " photons), delta = ", delta, " ns: preferred ", preferred_name(d),
              ", ratio ", d.ratio, " (needs Eq8 with > 1.5)"));

  // the same delay measured through the gated TAC, for reference
  auto det = q.cfg.effective_detection();
  det.delay_delta = std::max(0.0, delta - 0.5 * det.gate_width);
  const auto r = detection::route(q.stream, det, q.cfg.run.seed);
  const auto h = detection::tac_acquire(r.d1, r.d2, r.d3, det);
  const auto tac = detection::normalize_g3(h, {r.d1.rate_per_ns(), r.d2.rate_per_ns(), r.d3.rate_per_ns()});
  const auto dt = discriminate_at(tac, q.g2, det.delay_delta + 0.5 * det.gate_width, det.gate_width);
  info("C7q", str("TAC with a ", det.gate_width, " ns gate at ", det.delay_delta, " ns, ", h.n_starts,
                  " starts: preferred ", preferred_name(dt), ", ratio ", dt.ratio));

  const auto& c = cox_source();
  double worst = 0.0;
  std::string list;
  for (double f : {0.75, 1.0, 1.25}) {
    const auto dc = discriminate_source(c, f * c.envelope);
    const double eq8_pref = dc.ratio;
    worst = std::max(worst, eq8_pref);
    list += str(" ", f * c.envelope, " ns -> ", dc.ratio, ";");
  }
  verdict("C7c", worst <= 1.1, str("Cox source (", c.stream.size(), " events), Eq5/Eq8 ratio at", list,
                                   " max ", worst, " (limit 1.1)"));
}

void criterion_8() {
  // ideal chain: unit efficiency, no dead time, dark counts or jitter
  const auto cfg = config("cox.toml");
  auto p = cfg.laser;
  p.total_intensity = 0.03;
  p.seed = 81;
  const auto s = photonsim::simulate_multimode(p, 1e8).front();
  detection::AcquisitionConfig det;
  det.delay_delta = 10.0;
  det.gate_width = 8.0;
  det.tac_range = 20.0;
  det.bin_width = 1.0;
  const auto r = detection::route(s, det, 82);
  const auto h = detection::tac_acquire(r.d1, r.d2, r.d3, det);
  const auto tac = detection::normalize_g3(h, {r.d1.rate_per_ns(), r.d2.rate_per_ns(), r.d3.rate_per_ns()});
  estimators::G3Binning b;
  b.delta_lo = det.delay_delta;
  b.delta_bin = det.gate_width;
  b.tau_bin = det.bin_width;
  b.tau_max = det.tac_range;
  const auto row = estimators::estimate_g3_map(r.d1, r.d2, r.d3, b).conditional_slice(0);
  double z = 0.0;
  std::size_t compared = 0;
  for (std::size_t i = 0; i < tac.size(); ++i) {
    const std::size_t j = nearest_bin(row, tac.lag_ns[i]);
    if (std::abs(row.lag_ns[j] - tac.lag_ns[i]) > 0.25 * det.bin_width) continue;
    const double e = std::hypot(tac.stderr_[i], row.stderr_[j]);
    if (!(e > 0.0)) continue;
    z = std::max(z, std::abs(tac.values[i] - row.values[j]) / e);
    ++compared;
  }
  verdict("C8", compared > 0 && z <= 3.0,
          str("TAC slice (", h.n_starts, " starts) against the g3 map row: max |z| = ", z, " over ", compared,
              " bins (tol 3)"));

  // hand-traced fixture
  const auto at = [](std::vector<double> t) {
    EventStream e;
    for (double x : t) e.timestamps.push_back(ns_to_ticks(x, 1));
    e.duration = ns_to_ticks(1000.0, 1);
    return e;
  };
  detection::AcquisitionConfig fx;
  fx.delay_delta = 75.0;
  const auto hf = detection::tac_acquire(at({0.0, 78.0}), at({1.0, 77.0, 154.0}), at({82.0}), fx);
  std::uint64_t total = 0;
  std::size_t where = 0;
  for (std::size_t k = 0; k < hf.counts.size(); ++k) {
    total += hf.counts[k];
    if (hf.counts[k]) where = k;
  }
  const bool exact = hf.n_starts == 1 && total == 1 && std::abs(hf.lag(where) - 5.0) < 1e-9 &&
                     std::abs(hf.effective_delta - 77.0) < 1e-9;
  verdict("C8fx", exact, str("six-event fixture: starts ", hf.n_starts, ", counts ", total, " at tau ",
                              total ? hf.lag(where) : 0.0, " ns, effective delta ", hf.effective_delta,
                              " ns (expected 1, 1, 5, 77)"));
}

fitters::FitReport run_sweep(const fs::path& dir, const std::string& mapping) {
  cli::Options o;
  o.config_path = std::string(PHOTONSTAT_CONFIG_DIR) + "/pump_sweep.toml";
  o.mapping = mapping;
  o.out = (dir / ("sweep_" + mapping + ".txt")).string();
  std::ostringstream log;
  if (cli::run_pipeline("sweep-pump", o, log) != cli::Ok) throw std::runtime_error(log.str());
  return cli::decode_fit_report(cli::read_file(o.out)).report;
}

void criterion_9(const fs::path& dir) {
  const auto r = run_sweep(dir, "coupling");
  const double p = r.param("p");
  verdict("C9", p >= 0.4 && p <= 0.6,
          str("pump sweep (coupling scaled with sqrt(j)): p = ", p, " +- ", r.error("p"), " (range [0.4, 0.6])"));
  const auto rd = run_sweep(dir, "drive");
  info("C9", str("pump sweep with the drive amplitude scaled instead: p = ", rd.param("p"), " +- ", rd.error("p")));

  std::vector<std::pair<double, double>> exact;
  for (int i = 1; i <= 12; ++i) {
    const double j = 0.25 * i;
    exact.emplace_back(j, corrmodel::rabi_period(j, 6.0));
  }
  const auto e = fitters::fit_inverse_sqrt(exact, false);
  verdict("C9exact", std::abs(e.param("p") - 0.5) <= 1e-6,
          str("exact synthetic periods: p = ", str(e.param("p") - 0.5), " + 0.5 (tol 1e-6)"));
}

std::map<std::string, std::string> run_chain(const fs::path& dir) {
  fs::create_directories(dir);
  const std::string cfgdir = PHOTONSTAT_CONFIG_DIR;
  std::ostringstream log;
  const auto run = [&](const std::string& cmd, cli::Options o) {
    if (cli::run_pipeline(cmd, o, log) != cli::Ok) throw std::runtime_error(cmd + ": " + log.str());
  };
  const auto path = [&](const std::string& f) { return (dir / f).string(); };

  cli::Options o;
  o.config_path = cfgdir + "/cox.toml";
  o.duration = 2e6;
  o.out = path("cox.pts1");
  run("simulate", o);
  o.in = path("cox.pts1");
  o.out = path("cox_g2.csv");
  run("g2", o);
  o.in = path("cox_g2.csv");
  o.out = path("cox_g2_fit.txt");
  o.model = "g2";
  run("fit", o);
  o.in = path("cox.pts1");
  o.out = path("routed.pts1");
  run("route", o);
  o.in = path("routed.pts1");
  o.out = path("tac.csv");
  run("tac", o);

  cli::Options q;
  q.config_path = cfgdir + "/crosscheck.toml";
  q.model = "quantum";
  q.duration = 2e6;
  q.out = path("quantum.pts1");
  run("simulate", q);
  q.in = path("quantum.pts1");
  q.out = path("quantum_g2.csv");
  run("g2", q);
  q.delta = 2.0;
  q.out = path("quantum_g3.csv");
  run("g3map", q);

  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = cli::read_file(e.path().string());
  return files;
}

void criterion_10(const fs::path& dir) {
  // different worker counts must not change a byte
  ::setenv("PHOTONSTAT_THREADS", "1", 1);
  const auto a = run_chain(dir / "run_a");
  ::setenv("PHOTONSTAT_THREADS", "3", 1);
  const auto b = run_chain(dir / "run_b");
  ::unsetenv("PHOTONSTAT_THREADS");
  bool same = a.size() == b.size();
  std::size_t bytes = 0;
  for (const auto& [name, content] : a) {
    const auto it = b.find(name);
    if (it == b.end() || it->second != content) {
      same = false;
      info("C10", "differs: " + name);
    }
    bytes += content.size();
  }
  verdict("C10", same && a.size() >= 9,
          str(a.size(), " output files (", bytes, " bytes, PTS1 and CSV) from two runs with the same config and seed (1 and 3 threads) ",
              same ? "are" : "are not", " bit-identical"));
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const auto want = [&](int n) { return only.empty() || only.count(n) > 0; };

  const fs::path dir = fs::temp_directory_path() / ("photonstat_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);

  const std::vector<std::pair<int, std::function<void()>>> criteria = {
      {1, criterion_1}, {2, criterion_2}, {3, criterion_3}, {4, criterion_4}, {5, criterion_5},
      {6, criterion_6}, {7, criterion_7}, {8, criterion_8}, {9, [&] { criterion_9(dir); }},
      {10, [&] { criterion_10(dir); }},
  };
  for (const auto& [n, fn] : criteria) {
    if (!want(n)) continue;
    Stopwatch sw;
    try {
      fn();
    } catch (const std::exception& e) {
      verdict("C" + std::to_string(n), false, std::string("error: ") + e.what());
    }
    info("C" + std::to_string(n), str("took ", sw.seconds(), " s"));
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  std::printf("%s: %d failing\n", g_failures ? "FAIL" : "PASS", g_failures);
  return g_failures ? 1 : 0;
}
