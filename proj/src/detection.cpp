#include "photonstat/detection.hpp"

#include <algorithm>
#include <cmath>

#include "photonstat/error.hpp"
#include "photonstat/rng.hpp"

namespace photonstat::detection {

namespace {

constexpr const char* kModule = "detection";

std::int64_t to_ticks_signed(double t_ns, std::uint64_t res) {
  return std::llround(t_ns * 1e3 / static_cast<double>(res));
}

/// Efficiency, jitter, dark counts and dead time for one detector.
void degrade(EventStream& s, double eff, const AcquisitionConfig& cfg, Engine& eng) {
  const std::uint64_t res = s.resolution_ps;
  std::vector<std::uint64_t> out;
  out.reserve(s.size());
  for (std::uint64_t t : s.timestamps) {
    if (eff < 1.0 && !(uniform01(eng) < eff)) continue;
    if (cfg.jitter_sigma > 0.0) {
      const std::int64_t shifted =
          static_cast<std::int64_t>(t) + to_ticks_signed(cfg.jitter_sigma * standard_normal(eng), res);
      t = static_cast<std::uint64_t>(std::clamp<std::int64_t>(shifted, 0, static_cast<std::int64_t>(s.duration)));
    }
    out.push_back(t);
  }
  if (cfg.dark_rate > 0.0) {
    const double end = s.duration_ns();
    for (double t = exponential(eng, cfg.dark_rate); t < end; t += exponential(eng, cfg.dark_rate)) {
      out.push_back(ns_to_ticks(t, res));
    }
  }
  std::sort(out.begin(), out.end());
  if (cfg.dead_time > 0.0) {
    const auto dead = static_cast<std::uint64_t>(to_ticks_signed(cfg.dead_time, res));
    std::vector<std::uint64_t> kept;
    kept.reserve(out.size());
    for (std::uint64_t t : out) {
      if (kept.empty() || t - kept.back() >= dead) kept.push_back(t);
    }
    out.swap(kept);
  }
  s.timestamps.swap(out);
}

}  // namespace

bool AcquisitionConfig::valid() const {
  auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  return unit(split_bs1) && unit(split_bs2) && unit(efficiency[0]) && unit(efficiency[1]) && unit(efficiency[2]) &&
         dead_time >= 0.0 && dark_rate >= 0.0 && gate_width > 0.0 && delay_delta >= 0.0 && tac_range > 0.0 &&
         bin_width > 0.0 && jitter_sigma >= 0.0;
}

double TacHistogram::lag(std::size_t k) const {
  const auto half = static_cast<double>(counts.size() / 2);
  return (static_cast<double>(k) - half) * bin_width;
}

Routed route(const EventStream& in, const AcquisitionConfig& cfg, std::uint64_t seed) {
  if (!cfg.valid()) throw Error(Errc::InvalidParams, kModule, "invalid acquisition config");
  Routed r;
  EventStream* outs[3] = {&r.d1, &r.d2, &r.d3};
  for (int k = 0; k < 3; ++k) {
    outs[k]->resolution_ps = in.resolution_ps;
    outs[k]->duration = in.duration;
    outs[k]->channel = static_cast<std::uint8_t>(k + 1);
  }
  Engine eng = make_engine(seed, 0);
  for (std::uint64_t t : in.timestamps) {
    if (uniform01(eng) < cfg.split_bs1) {
      r.d1.timestamps.push_back(t);
    } else if (uniform01(eng) < cfg.split_bs2) {
      r.d2.timestamps.push_back(t);
    } else {
      r.d3.timestamps.push_back(t);
    }
  }
  for (int k = 0; k < 3; ++k) {
    Engine det = make_engine(seed, static_cast<std::uint64_t>(k) + 1);
    degrade(*outs[k], cfg.efficiency[k], cfg, det);
  }
  return r;
}

TacHistogram tac_acquire(const EventStream& d1, const EventStream& d2, const EventStream& d3,
                         const AcquisitionConfig& cfg) {
  if (!cfg.valid()) throw Error(Errc::InvalidParams, kModule, "invalid acquisition config");
  if ((d1.empty() || d2.empty() || d3.empty()) && cfg.dark_rate == 0.0) {
    throw Error(Errc::EmptyStreams, kModule, "every detector stream must contain events");
  }
  const std::uint64_t res = d2.resolution_ps;
  const std::int64_t delay = to_ticks_signed(cfg.delay_delta, res);
  const std::int64_t gate = to_ticks_signed(cfg.gate_width, res);
  const std::int64_t range = to_ticks_signed(cfg.tac_range, res);
  const std::int64_t bin = to_ticks_signed(cfg.bin_width, res);
  if (bin <= 0 || range <= 0 || gate <= 0) throw Error(Errc::InvalidParams, kModule, "sub-tick TAC settings");
  const std::int64_t half_bins = range / bin;

  TacHistogram h;
  h.delta = cfg.delay_delta;
  h.bin_width = static_cast<double>(bin) * d2.tick_ns();
  h.tac_range = cfg.tac_range;
  h.counts.assign(static_cast<std::size_t>(2 * half_bins + 1), 0);
  h.livetime = std::max({d1.duration_ns(), d2.duration_ns(), d3.duration_ns()});

  std::size_t i1 = 0, i3 = 0;
  std::int64_t busy_until = -1;
  double delta_sum = 0.0;
  for (std::uint64_t u2 : d2.timestamps) {
    const auto t2 = static_cast<std::int64_t>(u2);
    if (t2 < busy_until) continue;
    // latest D1 whose gate [t1 + delay, t1 + delay + gate) contains t2
    while (i1 < d1.size() && static_cast<std::int64_t>(d1.timestamps[i1]) + delay <= t2) ++i1;
    if (i1 == 0) continue;
    const auto t1 = static_cast<std::int64_t>(d1.timestamps[i1 - 1]);
    if (t2 >= t1 + delay + gate) continue;
    // a start whose gate opened while busy would have been ignored
    if (t1 + delay < busy_until) continue;
    ++h.n_starts;
    delta_sum += static_cast<double>(t2 - t1);
    while (i3 < d3.size() && static_cast<std::int64_t>(d3.timestamps[i3]) <= t2 - range) ++i3;
    if (i3 < d3.size() && static_cast<std::int64_t>(d3.timestamps[i3]) < t2 + range) {
      const std::int64_t lag = static_cast<std::int64_t>(d3.timestamps[i3]) - t2;
      // bin k covers [(k - 1/2) bin, (k + 1/2) bin)
      const std::int64_t num = 2 * lag + bin;
      const std::int64_t k = (num >= 0 ? num : num - 2 * bin + 1) / (2 * bin);
      if (k >= -half_bins && k <= half_bins) ++h.counts[static_cast<std::size_t>(k + half_bins)];
      busy_until = static_cast<std::int64_t>(d3.timestamps[i3]) + range;
    } else {
      busy_until = t2 + 2 * range;
    }
  }
  h.effective_delta = h.n_starts > 0 ? delta_sum / static_cast<double>(h.n_starts) * d2.tick_ns() : cfg.delay_delta;
  return h;
}

Correlogram normalize_g3(const TacHistogram& h, const std::array<double, 3>& rates) {
  if (!(rates[2] > 0.0) || h.n_starts == 0) throw Error(Errc::ZeroBaseline, kModule, "no stop rate or no starts");
  if (!(rates[0] > 0.0) || !(rates[1] > 0.0)) throw Error(Errc::ZeroBaseline, kModule, "zero gate or start rate");
  Correlogram c;
  c.bin_width_ns = h.bin_width;
  double pending = static_cast<double>(h.n_starts);
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    const double n = static_cast<double>(h.counts[k]);
    // edge bins are cut by the open window (-range, range)
    const double lo = std::max(h.lag(k) - 0.5 * h.bin_width, -h.tac_range);
    const double hi = std::min(h.lag(k) + 0.5 * h.bin_width, h.tac_range);
    const double base = pending * rates[2] * std::max(hi - lo, 0.0);
    c.lag_ns.push_back(h.lag(k));
    c.counts.push_back(h.counts[k]);
    c.values.push_back(base > 0.0 ? n / base : 0.0);
    c.stderr_.push_back(base > 0.0 ? std::sqrt(std::max(n, 1.0)) / base : 0.0);
    c.total_pairs += h.counts[k];
    pending -= n;
  }
  return c;
}

}  // namespace photonstat::detection
