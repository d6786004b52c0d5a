#include "photonstat/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>

#include "photonstat/corrmodel.hpp"
#include "photonstat/error.hpp"
#include "photonstat/estimators.hpp"
#include "photonstat/fitters.hpp"
#include "photonstat/formats.hpp"
#include "photonstat/photonsim.hpp"
#include "photonstat/qdynamics.hpp"

namespace photonstat::cli {
namespace {

constexpr const char* kModule = "cli";
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

[[noreturn]] void bad_option(const std::string& what) { throw Error(Errc::ValidationError, kModule, what); }

struct Context {
  const Options& o;
  RunConfig cfg;
  std::ostream& log;

  std::uint64_t seed() const { return cfg.run.seed; }

  std::string out_path(const std::string& fallback) const {
    if (!o.out.empty()) return o.out;
    return (std::filesystem::path(cfg.run.out_dir) / fallback).string();
  }

  Metadata meta(const std::string& kind) const {
    return {{"kind", kind}, {"config_hash", hex64(config_hash(cfg))}, {"seed", std::to_string(seed())}};
  }

  const std::string& input() const {
    if (o.in.empty()) bad_option("--in is required");
    return o.in;
  }
};

EventStream select(const std::vector<EventStream>& streams, const std::vector<int>& channels) {
  if (channels.empty()) bad_option("no channels selected");
  std::vector<EventStream> parts;
  for (int ch : channels) {
    auto it = std::find_if(streams.begin(), streams.end(), [ch](const EventStream& s) { return s.channel == ch; });
    if (it == streams.end()) throw Error(Errc::EmptyStream, kModule, "channel " + std::to_string(ch) + " has no events");
    parts.push_back(*it);
  }
  if (parts.size() == 1) return parts.front();
  EventStream m = merge_streams(parts, parts.front().channel);
  for (const auto& p : parts) m.duration = std::max(m.duration, p.duration);
  return m;
}

Metadata with(Metadata m, const Metadata& extra) {
  m.insert(m.end(), extra.begin(), extra.end());
  return m;
}

/// Starting point for a g2 fit: the spectral fundamental, then a linear solve.
corrmodel::HarmonicG2Params initial_guess(const Correlogram& c, int k_harmonics) {
  const auto s = estimators::fourier_spectrum(c, k_harmonics);
  if (!s.found) throw Error(Errc::BadInit, kModule, "no oscillation to fit: fundamental not found");
  return fitters::initial_g2_guess(c, k_harmonics, s.fundamental);
}

/// Zero-count bins carry no error estimate; give them the error of a single count.
Correlogram fit_ready(Correlogram c) {
  double floor = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.counts.size() > i && c.counts[i] > 0 && c.stderr_[i] > 0.0) {
      floor = std::max(floor, c.values[i] / std::sqrt(static_cast<double>(c.counts[i])));
    }
  }
  for (auto& e : c.stderr_) {
    if (!(e > 0.0)) e = floor > 0.0 ? floor : 1.0;
  }
  return c;
}

std::string model_curve_path(const std::string& report_path) {
  std::filesystem::path p(report_path);
  p.replace_extension();
  return p.string() + "_curve.csv";
}

std::string discrimination_text(const fitters::DiscriminationReport& d, const Metadata& meta) {
  std::string out;
  for (const auto& [k, v] : meta) out += k + " = " + v + "\n";
  out += "preferred = " + std::string(d.preferred == fitters::Preferred::Quantum_Eq8 ? "Eq8" : "Eq5") + "\n";
  out += "ratio = " + fmt(d.ratio) + "\n";
  out += "eq5.delta = " + fmt(d.fit_eq5.param("delta")) + "\n";
  out += "eq5.delta_err = " + fmt(d.fit_eq5.error("delta")) + "\n";
  out += "eq5.residual_ss = " + fmt(d.fit_eq5.residual_ss) + "\n";
  out += "eq5.converged = " + std::string(d.fit_eq5.converged ? "true" : "false") + "\n";
  out += "eq8.delta = " + fmt(d.fit_eq8.param("delta")) + "\n";
  out += "eq8.delta_err = " + fmt(d.fit_eq8.error("delta")) + "\n";
  out += "eq8.residual_ss = " + fmt(d.fit_eq8.residual_ss) + "\n";
  out += "eq8.converged = " + std::string(d.fit_eq8.converged ? "true" : "false") + "\n";
  out += "dof = " + std::to_string(d.fit_eq5.dof) + "\n";
  return out;
}

/// Delay scan for a slice; the averaging window comes from the file metadata.
fitters::DeltaScan scan_for(const Options& o, const std::map<std::string, std::string>& meta = {}) {
  fitters::DeltaScan s;
  if (o.delta_max > 0.0) s.delta_max = o.delta_max;
  if (auto it = meta.find("delta_window_ns"); it != meta.end()) s.delta_window = std::strtod(it->second.c_str(), nullptr);
  return s;
}

// ---- subcommands ----

int cmd_simulate(Context& ctx) {
  const double duration = ctx.o.duration > 0.0 ? ctx.o.duration : ctx.cfg.run.duration;
  std::vector<EventStream> streams;
  if (ctx.o.model == "classical") {
    auto p = ctx.cfg.laser;
    p.seed = ctx.seed();
    streams = photonsim::simulate_multimode(p, duration);
  } else if (ctx.o.model == "quantum") {
    streams.push_back(photonsim::quantum_trajectory(ctx.cfg.quantum, duration, ctx.seed()).photons);
  } else {
    bad_option("--model must be classical or quantum");
  }
  const auto path = ctx.out_path("events.pts1");
  write_pts1(path, streams);
  std::size_t total = 0;
  for (const auto& s : streams) total += s.size();
  ctx.log << "simulate: " << streams.size() << " channel(s), " << total << " events -> " << path << "\n";
  return Ok;
}

int cmd_route(Context& ctx) {
  const auto in = select(read_pts1(ctx.input()), ctx.o.channels);
  const auto r = detection::route(in, ctx.cfg.effective_detection(), ctx.seed());
  const auto path = ctx.out_path("routed.pts1");
  write_pts1(path, {r.d1, r.d2, r.d3});
  ctx.log << "route: D1 " << r.d1.size() << ", D2 " << r.d2.size() << ", D3 " << r.d3.size() << " -> " << path << "\n";
  return Ok;
}

int cmd_tac(Context& ctx) {
  const auto streams = read_pts1(ctx.input());
  auto acq = ctx.cfg.effective_detection();
  if (ctx.o.delta >= 0.0) acq.delay_delta = ctx.o.delta;
  const auto d1 = select(streams, {1}), d2 = select(streams, {2}), d3 = select(streams, {3});
  const auto h = detection::tac_acquire(d1, d2, d3, acq);
  const auto g3 = detection::normalize_g3(h, {d1.rate_per_ns(), d2.rate_per_ns(), d3.rate_per_ns()});
  const auto path = ctx.out_path("tac.csv");
  write_correlogram_csv(path, g3,
                        with(ctx.meta("g3_slice_tac"), {{"normalization", "g3/g2(delta)"},
                                                        {"delta_ns", fmt(acq.delay_delta)},
                                                        {"delta_window_ns", fmt(acq.gate_width)},
                                                        {"effective_delta_ns", fmt(h.effective_delta)},
                                                        {"n_starts", std::to_string(h.n_starts)},
                                                        {"bin_width_ns", fmt(h.bin_width)}}));
  ctx.log << "tac: " << h.n_starts << " starts, effective delta " << short_fmt(h.effective_delta) << " ns -> " << path
          << "\n";
  return Ok;
}

int cmd_g2(Context& ctx) {
  const auto s = select(read_pts1(ctx.input()), ctx.o.channels);
  const auto& a = ctx.cfg.acquisition;
  const auto g = estimators::estimate_g2(s, s, a.bin, a.max_lag);
  const auto path = ctx.out_path("g2.csv");
  write_correlogram_csv(path, g, with(ctx.meta("g2"), {{"bin_width_ns", fmt(a.bin)}, {"events", std::to_string(s.size())}}));
  ctx.log << "g2: " << g.size() << " bins from " << s.size() << " events -> " << path << "\n";
  return Ok;
}

int cmd_xg2(Context& ctx) {
  const auto streams = read_pts1(ctx.input());
  const auto a = select(streams, ctx.o.channels), b = select(streams, {ctx.o.channel_b});
  const auto& acq = ctx.cfg.acquisition;
  const auto g = estimators::estimate_cross_g2(a, b, acq.bin, acq.max_lag);
  const auto path = ctx.out_path("xg2.csv");
  write_correlogram_csv(path, g, with(ctx.meta("cross_g2"), {{"bin_width_ns", fmt(acq.bin)}}));
  ctx.log << "xg2: " << g.size() << " bins -> " << path << "\n";
  return Ok;
}

int cmd_g3map(Context& ctx) {
  const auto streams = read_pts1(ctx.input());
  EventStream s1, s2, s3;
  if (!ctx.o.roles.empty()) {
    if (ctx.o.roles.size() != 3) bad_option("--roles needs three channels");
    s1 = select(streams, {ctx.o.roles[0]});
    s2 = select(streams, {ctx.o.roles[1]});
    s3 = select(streams, {ctx.o.roles[2]});
  } else {
    s1 = select(streams, ctx.o.channels);
  }
  const EventStream& r1 = s1;
  const EventStream& r2 = ctx.o.roles.empty() ? s1 : s2;
  const EventStream& r3 = ctx.o.roles.empty() ? s1 : s3;

  estimators::G3Binning b;
  b.delta_bin = ctx.o.delta_bin > 0.0 ? ctx.o.delta_bin : ctx.cfg.detection.gate_width;
  b.tau_bin = ctx.o.tau_bin > 0.0 ? ctx.o.tau_bin : ctx.cfg.acquisition.bin;
  b.tau_max = ctx.o.tau_max > 0.0 ? ctx.o.tau_max : ctx.cfg.acquisition.max_lag;
  if (ctx.o.delta >= 0.0) {
    b.delta_lo = std::max(0.0, ctx.o.delta - 0.5 * b.delta_bin);
    b.n_delta = 1;
  } else {
    if (ctx.o.n_delta < 1) bad_option("--n-delta must be >= 1");
    b.delta_lo = ctx.o.delta_lo;
    b.n_delta = static_cast<std::size_t>(ctx.o.n_delta);
  }
  const auto m = estimators::estimate_g3_map(r1, r2, r3, b);
  if (ctx.o.delta >= 0.0) {
    const auto path = ctx.out_path("g3_slice.csv");
    write_correlogram_csv(path, m.conditional_slice(0),
                          with(ctx.meta("g3_slice"), {{"normalization", "g3/g2(delta)"},
                                                      {"delta_ns", fmt(m.delta_grid[0])},
                                                      {"delta_window_ns", fmt(b.delta_bin)},
                                                      {"bin_width_ns", fmt(b.tau_bin)}}));
    ctx.log << "g3map: slice at delta " << short_fmt(m.delta_grid[0]) << " ns -> " << path << "\n";
    return Ok;
  }
  std::vector<std::vector<double>> rows;
  for (std::size_t r = 0; r < m.delta_grid.size(); ++r) {
    const auto cond = m.conditional_slice(r);
    for (std::size_t k = 0; k < m.tau_grid.size(); ++k) {
      rows.push_back({m.delta_grid[r], m.tau_grid[k], m.values[r][k], m.stderr_[r][k],
                      static_cast<double>(m.counts[r][k]), cond.values[k]});
    }
  }
  const auto path = ctx.out_path("g3map.csv");
  write_atomic(path, encode_table_csv({"delta_ns", "tau_ns", "value", "stderr", "counts", "conditional"}, rows,
                                      with(ctx.meta("g3_map"), {{"delta_bin_ns", fmt(b.delta_bin)},
                                                                {"tau_bin_ns", fmt(b.tau_bin)}})));
  ctx.log << "g3map: " << m.delta_grid.size() << " x " << m.tau_grid.size() << " -> " << path << "\n";
  return Ok;
}

int cmd_spectrum(Context& ctx) {
  const auto in = read_correlogram_csv(ctx.input());
  const int k = std::max(1, ctx.o.harmonics);
  const auto s = estimators::fourier_spectrum(in.data, k);
  Metadata extra{{"window", s.window}, {"fundamental_rad_per_ns", s.found ? fmt(s.fundamental) : "not found"}};
  for (std::size_t i = 0; i < s.harmonic_amps.size(); ++i) {
    extra.emplace_back("harmonic_" + std::to_string(i + 1), fmt(s.harmonic_amps[i]));
  }
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < s.freq_grid.size(); ++i) rows.push_back({s.freq_grid[i], s.amplitudes[i]});
  const auto path = ctx.out_path("spectrum.csv");
  write_atomic(path, encode_table_csv({"omega_rad_per_ns", "amplitude"}, rows, with(ctx.meta("spectrum"), extra)));
  if (!s.found) {
    ctx.log << "spectrum: fundamental not found (window " << s.window << ")\n";
  } else {
    ctx.log << "spectrum: fundamental " << short_fmt(s.fundamental) << " rad/ns (period "
            << short_fmt(kTwoPi / s.fundamental) << " ns, window " << s.window << ")\n";
    for (std::size_t i = 0; i < s.harmonic_amps.size(); ++i) {
      ctx.log << "  harmonic " << i + 1 << ": " << short_fmt(s.harmonic_amps[i]) << "  ratio "
              << short_fmt(s.harmonic_amps[i] / s.harmonic_amps[0]) << "\n";
    }
  }
  return Ok;
}

int cmd_visibility(Context& ctx) {
  const auto in = read_correlogram_csv(ctx.input());
  if (in.data.size() == 0) throw Error(Errc::EmptyWindow, kModule, "empty correlogram");
  std::pair<double, double> w{ctx.o.window_lo, ctx.o.window_hi};
  if (!(w.second > w.first)) w = {in.data.lag_ns.front(), in.data.lag_ns.back()};
  const auto v = corrmodel::visibility(in.data, w);
  std::string text;
  for (const auto& [k, val] : ctx.meta("visibility")) text += k + " = " + val + "\n";
  text += "visibility = " + fmt(v.v) + "\ng2_max = " + fmt(v.g2_max) + "\ng2_min = " + fmt(v.g2_min) +
          "\nwindow_lo_ns = " + fmt(v.window.first) + "\nwindow_hi_ns = " + fmt(v.window.second) + "\n";
  const auto path = ctx.out_path("visibility.txt");
  write_atomic(path, text);
  ctx.log << "visibility: V = " << short_fmt(v.v) << " (g2 max " << short_fmt(v.g2_max) << ", min "
          << short_fmt(v.g2_min) << ")\n";
  return Ok;
}

corrmodel::HarmonicG2Params load_g2_params(const Options& o) {
  if (o.g2_params.empty()) bad_option("--g2-params is required for g3 fits");
  return fitters::g2_params(decode_fit_report(read_file(o.g2_params)).report);
}

int write_discrimination(Context& ctx, const CorrelogramFile& slice, const corrmodel::HarmonicG2Params& g2,
                         const std::string& fallback) {
  const auto d = fitters::discriminate(fit_ready(slice.data), g2, scan_for(ctx.o, slice.meta));
  const auto path = ctx.out_path(fallback);
  write_atomic(path, discrimination_text(d, ctx.meta("discrimination")));
  ctx.log << "discriminate: preferred " << (d.preferred == fitters::Preferred::Quantum_Eq8 ? "Eq8" : "Eq5")
          << ", residual ratio Eq5/Eq8 = " << short_fmt(d.ratio) << " (delta " << short_fmt(d.fit_eq5.param("delta"))
          << " / " << short_fmt(d.fit_eq8.param("delta")) << " ns) -> " << path << "\n";
  return Ok;
}

int cmd_fit(Context& ctx) {
  const auto in = read_correlogram_csv(ctx.input());
  const auto& model = ctx.o.model == "classical" ? std::string("g2") : ctx.o.model;
  if (model == "both") return write_discrimination(ctx, in, load_g2_params(ctx.o), "discrimination.txt");
  const auto path = ctx.out_path("fit.txt");
  if (model == "eq5" || model == "eq8") {
    const auto kind = model == "eq5" ? corrmodel::ModelKind::Classical_Eq5 : corrmodel::ModelKind::Quantum_Eq8;
    const auto g2 = load_g2_params(ctx.o);
    const auto scan = scan_for(ctx.o, in.meta);
    const auto r = fitters::fit_g3_delta(fit_ready(in.data), g2, kind, scan);
    write_atomic(path, encode_fit_report(r, with(ctx.meta("g3_fit"), {{"model", corrmodel::model_name(kind)}})));
    std::vector<std::vector<double>> rows;
    for (double t : in.data.lag_ns) rows.push_back({t, fitters::g3_model(g2, kind, scan.delta_window)(r.param("delta"), t)});
    write_atomic(model_curve_path(path), encode_table_csv({"tau_ns", "model"}, rows, ctx.meta("g3_model_curve")));
    ctx.log << "fit: " << corrmodel::model_name(kind) << " delta = " << short_fmt(r.param("delta")) << " +- "
            << short_fmt(r.error("delta")) << " ns, residual " << short_fmt(r.residual_ss) << " -> " << path << "\n";
    return Ok;
  }
  if (model != "g2") bad_option("--model must be g2, eq5, eq8 or both");
  const auto data = fit_ready(in.data);
  const auto r = fitters::fit_g2(data, ctx.o.harmonics, initial_guess(data, ctx.o.harmonics));
  write_atomic(path, encode_fit_report(r, with(ctx.meta("g2_fit"), {{"harmonics", std::to_string(ctx.o.harmonics)}})));
  const auto p = fitters::g2_params(r);
  std::vector<std::vector<double>> rows;
  for (double t : in.data.lag_ns) rows.push_back({t, corrmodel::eval_g2(p, t)});
  write_atomic(model_curve_path(path), encode_table_csv({"tau_ns", "model"}, rows, ctx.meta("g2_model_curve")));
  ctx.log << "fit: omega = " << short_fmt(r.param("omega")) << " +- " << short_fmt(r.error("omega"))
          << " rad/ns, decay = " << short_fmt(r.param("decay_rate")) << " /ns, chi2/dof = "
          << short_fmt(r.residual_ss / std::max(1, r.dof)) << (r.converged ? "" : " (not converged)") << " -> "
          << path << "\n";
  return Ok;
}

int cmd_discriminate(Context& ctx) {
  const auto in = read_correlogram_csv(ctx.input());
  return write_discrimination(ctx, in, load_g2_params(ctx.o), "discrimination.txt");
}

/// g2 oscillation period from the pinned amplitude evolution, ns.
double model_period(const qdynamics::CavityModelParams& p) {
  const double rate = std::hypot(p.coupling_g, 0.5 * (p.detuning_a - p.detuning_b));
  const double t_guess = kTwoPi / std::max(rate, 1e-9);
  const std::size_t n = 3001;
  const auto g = qdynamics::g2_curve(p, qdynamics::uniform_grid(30.0 * t_guess / static_cast<double>(n - 1), n));
  Correlogram c;
  c.lag_ns = g.tau;
  c.values = g.values;
  c.stderr_.assign(n, 0.0);
  const auto s = estimators::fourier_spectrum(c, 1);
  if (!s.found) throw Error(Errc::NotConverged, kModule, "no oscillation in the model g2");
  return kTwoPi / s.fundamental;
}

int cmd_sweep_pump(Context& ctx) {
  std::vector<double> pump = ctx.o.pump;
  if (pump.empty()) {
    for (int i = 0; i < 12; ++i) pump.push_back(ctx.o.j0 + 0.25 * (i + 1));
  }
  const bool coupling = ctx.o.mapping == "coupling";
  if (!coupling && ctx.o.mapping != "drive") bad_option("--mapping must be coupling or drive");
  std::vector<std::pair<double, double>> pts;
  std::vector<std::vector<double>> rows;
  for (double j : pump) {
    if (!(j > ctx.o.j0)) bad_option("pump values must exceed j0");
    auto p = ctx.cfg.quantum;
    // both mappings scale an amplitude with sqrt(j - j0)
    if (coupling) {
      p.coupling_g *= std::sqrt(j - ctx.o.j0);
    } else {
      p.drive_eps *= std::sqrt(j - ctx.o.j0);
    }
    double period = 0.0;
    try {
      period = model_period(p);
    } catch (const Error& e) {
      throw Error(e.code(), kModule, "pump " + fmt(j) + ": no oscillation in the model g2 (overdamped?)");
    }
    pts.emplace_back(j, period);
    rows.push_back({j, period});
  }
  const auto r = fitters::fit_inverse_sqrt(pts, ctx.o.fit_j0, ctx.o.j0);
  const auto path = ctx.out_path("sweep_pump.txt");
  write_atomic(path, encode_fit_report(r, with(ctx.meta("pump_sweep"), {{"mapping", ctx.o.mapping}})));
  write_atomic(model_curve_path(path), encode_table_csv({"j_norm", "period_ns"}, rows, ctx.meta("pump_sweep")));
  ctx.log << "sweep-pump (" << ctx.o.mapping << "): p = " << short_fmt(r.param("p")) << " +- "
          << short_fmt(r.error("p")) << ", a = " << short_fmt(r.param("a")) << " ns -> " << path << "\n";
  return Ok;
}

/// Quantum source through the full chain: g2 fit, then a delay slice both from
/// the unsplit stream and from the gated TAC, each discriminated.
int cmd_demo(Context& ctx) {
  namespace fs = std::filesystem;
  const fs::path dir = ctx.o.out.empty() ? fs::path(ctx.cfg.run.out_dir) : fs::path(ctx.o.out);
  const double duration = ctx.o.duration > 0.0 ? ctx.o.duration : ctx.cfg.run.duration;
  const auto& acq = ctx.cfg.acquisition;
  const auto traj = photonsim::quantum_trajectory(ctx.cfg.quantum, duration, ctx.seed());
  const auto& s = traj.photons;
  write_pts1((dir / "quantum.pts1").string(), {s});
  ctx.log << "demo: " << s.size() << " photons over " << short_fmt(duration) << " ns\n";

  const auto g2 = estimators::estimate_g2(s, s, acq.bin, acq.max_lag);
  write_correlogram_csv((dir / "g2.csv").string(), g2, with(ctx.meta("g2"), {{"bin_width_ns", fmt(acq.bin)}}));
  const auto data = fit_ready(g2);
  const auto fit = fitters::fit_g2(data, ctx.o.harmonics, initial_guess(data, ctx.o.harmonics));
  write_atomic((dir / "g2_fit.txt").string(), encode_fit_report(fit, ctx.meta("g2_fit")));
  const auto params = fitters::g2_params(fit);
  ctx.log << "demo: g2 period " << short_fmt(kTwoPi / params.omega) << " ns, decay "
          << short_fmt(params.decay_rate) << " /ns\n";

  const double delta = ctx.o.delta >= 0.0 ? ctx.o.delta
                       : ctx.cfg.detection.delay_delta > 0.0 ? ctx.cfg.detection.delay_delta
                                                              : 1.0 / std::max(params.decay_rate, 1e-9);
  estimators::G3Binning b;
  b.delta_bin = ctx.o.delta_bin > 0.0 ? ctx.o.delta_bin : acq.bin;
  b.delta_lo = std::max(0.0, delta - 0.5 * b.delta_bin);
  b.tau_bin = acq.bin;
  b.tau_max = acq.max_lag;
  const auto slice = estimators::estimate_g3_map(s, s, s, b).conditional_slice(0);
  const Metadata slice_meta{{"normalization", "g3/g2(delta)"}, {"delta_ns", fmt(delta)}, {"delta_window_ns", fmt(b.delta_bin)}};
  write_correlogram_csv((dir / "g3_slice.csv").string(), slice, with(ctx.meta("g3_slice"), slice_meta));
  auto scan = scan_for(ctx.o);
  scan.delta_window = b.delta_bin;
  const auto d = fitters::discriminate(fit_ready(slice), params, scan);
  write_atomic((dir / "discrimination.txt").string(), discrimination_text(d, ctx.meta("discrimination")));
  ctx.log << "demo: delta " << short_fmt(delta) << " ns, preferred "
          << (d.preferred == fitters::Preferred::Quantum_Eq8 ? "Eq8" : "Eq5") << ", ratio " << short_fmt(d.ratio)
          << "\n";

  // the gated chain: the gate opens at delta, so its centre sits half a gate later
  auto det = ctx.cfg.effective_detection();
  det.delay_delta = std::max(0.0, delta - 0.5 * det.gate_width);
  const auto routed = detection::route(s, det, ctx.seed());
  write_pts1((dir / "routed.pts1").string(), {routed.d1, routed.d2, routed.d3});
  if (routed.d1.empty() || routed.d2.empty() || routed.d3.empty()) {
    ctx.log << "demo: a detector saw no events, TAC skipped\n";
    return Ok;
  }
  const auto h = detection::tac_acquire(routed.d1, routed.d2, routed.d3, det);
  const auto tac = detection::normalize_g3(h, {routed.d1.rate_per_ns(), routed.d2.rate_per_ns(), routed.d3.rate_per_ns()});
  write_correlogram_csv((dir / "tac.csv").string(), tac,
                        with(ctx.meta("g3_slice_tac"), {{"normalization", "g3/g2(delta)"},
                                                        {"delta_ns", fmt(det.delay_delta)},
                                                        {"delta_window_ns", fmt(det.gate_width)},
                                                        {"n_starts", std::to_string(h.n_starts)}}));
  scan.delta_window = det.gate_width;
  const auto dt = fitters::discriminate(fit_ready(tac), params, scan);
  write_atomic((dir / "discrimination_tac.txt").string(), discrimination_text(dt, ctx.meta("discrimination")));
  ctx.log << "demo: TAC " << h.n_starts << " starts, preferred "
          << (dt.preferred == fitters::Preferred::Quantum_Eq8 ? "Eq8" : "Eq5") << ", ratio " << short_fmt(dt.ratio)
          << "\n";
  return Ok;
}

const std::map<std::string, std::function<int(Context&)>>& commands() {
  static const std::map<std::string, std::function<int(Context&)>> table{
      {"simulate", cmd_simulate}, {"route", cmd_route},       {"tac", cmd_tac},
      {"g2", cmd_g2},             {"xg2", cmd_xg2},           {"g3map", cmd_g3map},
      {"spectrum", cmd_spectrum}, {"visibility", cmd_visibility}, {"fit", cmd_fit},
      {"discriminate", cmd_discriminate}, {"sweep-pump", cmd_sweep_pump}, {"demo", cmd_demo},
  };
  return table;
}

}  // namespace

RunConfig load_config(const Options& o) {
  RunConfig cfg = o.config_path.empty() ? RunConfig{} : parse_config(o.config_path);
  if (o.seed) cfg.run.seed = *o.seed;
  cfg.laser.seed = cfg.run.seed;
  validate(cfg);
  return cfg;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, f] : commands()) v.push_back(k);
    return v;
  }();
  return names;
}

int run_pipeline(const std::string& command, const Options& o, std::ostream& log, std::ostream* err) {
  std::ostream& report = err ? *err : log;
  try {
    const auto it = commands().find(command);
    if (it == commands().end()) bad_option("unknown command " + command);
    Context ctx{o, load_config(o), log};
    return it->second(ctx);
  } catch (const Error& e) {
    report << "error: " << e.what() << "\n";
    return e.code() == Errc::ValidationError || e.code() == Errc::ParseError ? ValidationFailure : RuntimeFailure;
  } catch (const std::exception& e) {
    report << "error: " << e.what() << "\n";
    return RuntimeFailure;
  }
}

}  // namespace photonstat::cli
