#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "photonstat/correlogram.hpp"
#include "photonstat/event_stream.hpp"

namespace photonstat::detection {

/// Three-detector start-stop chain: BS1 splits off D1 (gate), BS2 splits the
/// rest between D2 (start) and D3 (stop). Times in ns.
struct AcquisitionConfig {
  double split_bs1 = 1.0 / 3.0;  ///< probability BS1 sends a photon to D1
  double split_bs2 = 0.5;        ///< probability BS2 sends a photon to D2
  std::array<double, 3> efficiency{1.0, 1.0, 1.0};
  double dead_time = 0.0;
  double dark_rate = 0.0;  ///< counts/ns per detector
  double gate_width = 8.0;
  double delay_delta = 0.0;
  double tac_range = 500.0;
  double bin_width = 1.0;
  double jitter_sigma = 0.0;

  bool valid() const;
};

struct Routed {
  EventStream d1, d2, d3;
};

/// Beamsplitters, then per detector: efficiency thinning, Gaussian jitter,
/// dark counts, and non-paralyzable dead time. Deterministic given seed.
Routed route(const EventStream& in, const AcquisitionConfig& cfg, std::uint64_t seed);

struct TacHistogram {
  double delta = 0.0;            ///< nominal delay, ns
  double effective_delta = 0.0;  ///< mean t2 - t1 over starts, ns
  double bin_width = 0.0;
  double tac_range = 0.0;
  std::vector<std::uint64_t> counts;  ///< bin k centred on (k - K) * bin_width
  std::uint64_t n_starts = 0;
  double livetime = 0.0;  ///< ns

  double lag(std::size_t k) const;
};

/// Gated start-stop state machine.
/// A D1 event at t1 opens a gate [t1 + delay, t1 + delay + gate_width). The first
/// D2 event inside an open gate starts a conversion. D3 passes a delay line of
/// length tac_range, so the first D3 event with t3 - t2 in (-range, range)
/// stops it and stop - start = t3 - t2 is histogrammed. The converter stays busy
/// until the delayed stop arrives (t3 + range), or until t2 + 2 range when no
/// stop came; gates and D2 events during that time are ignored.
TacHistogram tac_acquire(const EventStream& d1, const EventStream& d2, const EventStream& d3,
                         const AcquisitionConfig& cfg);

/// Converts first-stop counts to g3(delta, tau) / g2(delta): counts divided by
/// the stop-channel rate, the bin width and the number of starts still waiting
/// for a stop at that lag (earlier stops remove a start from the pool).
Correlogram normalize_g3(const TacHistogram& h, const std::array<double, 3>& rates_per_ns);

}  // namespace photonstat::detection
