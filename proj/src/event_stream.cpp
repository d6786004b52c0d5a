#include "photonstat/event_stream.hpp"

#include <algorithm>
#include <cmath>

namespace photonstat {

double EventStream::rate_per_ns() const {
  const double t = duration_ns();
  return t > 0.0 ? static_cast<double>(timestamps.size()) / t : 0.0;
}

bool EventStream::valid() const {
  if (resolution_ps == 0) return false;
  if (!std::is_sorted(timestamps.begin(), timestamps.end())) return false;
  return timestamps.empty() || timestamps.back() <= duration;
}

std::uint64_t ns_to_ticks(double t_ns, std::uint64_t resolution_ps) {
  if (!(t_ns > 0.0)) return 0;
  return static_cast<std::uint64_t>(std::llround(t_ns * 1e3 / static_cast<double>(resolution_ps)));
}

EventStream merge_streams(const std::vector<EventStream>& parts, std::uint8_t channel) {
  EventStream out;
  out.channel = channel;
  std::size_t total = 0;
  for (const auto& p : parts) {
    total += p.size();
    out.duration = std::max(out.duration, p.duration);
    out.resolution_ps = p.resolution_ps;
  }
  out.timestamps.reserve(total);
  for (const auto& p : parts) {
    const auto mid = out.timestamps.insert(out.timestamps.end(), p.timestamps.begin(), p.timestamps.end());
    std::inplace_merge(out.timestamps.begin(), mid, out.timestamps.end());
  }
  return out;
}

}  // namespace photonstat
