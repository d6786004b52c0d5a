#pragma once

#include <cstdint>
#include <vector>

namespace photonstat {

/// Time-sorted detection timestamps of one channel, in integer ticks.
struct EventStream {
  std::uint64_t resolution_ps = 1;  ///< tick length
  std::uint8_t channel = 0;
  std::vector<std::uint64_t> timestamps;
  std::uint64_t duration = 0;  ///< observation window [0, duration] in ticks

  double tick_ns() const { return static_cast<double>(resolution_ps) * 1e-3; }
  double duration_ns() const { return static_cast<double>(duration) * tick_ns(); }
  double time_ns(std::size_t i) const { return static_cast<double>(timestamps[i]) * tick_ns(); }
  std::size_t size() const { return timestamps.size(); }
  bool empty() const { return timestamps.empty(); }

  /// Mean count rate over the observation window, counts/ns.
  double rate_per_ns() const;

  /// True when sorted, bounded by duration and resolution > 0.
  bool valid() const;
};

std::uint64_t ns_to_ticks(double t_ns, std::uint64_t resolution_ps);

/// Merge several streams into one (channel of the first), stable timestamp sort.
EventStream merge_streams(const std::vector<EventStream>& parts, std::uint8_t channel);

}  // namespace photonstat
