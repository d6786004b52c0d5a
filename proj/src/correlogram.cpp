#include "photonstat/correlogram.hpp"

#include <cmath>

namespace photonstat {

bool Correlogram::uniform(double rel_tol) const {
  if (lag_ns.size() < 2) return true;
  const double step = lag_ns[1] - lag_ns[0];
  if (!(step > 0.0)) return false;
  for (std::size_t i = 1; i < lag_ns.size(); ++i) {
    if (std::abs((lag_ns[i] - lag_ns[i - 1]) - step) > rel_tol * step) return false;
  }
  return true;
}

BinRange bins_in_window(const Correlogram& c, double lo_ns, double hi_ns) {
  BinRange r{c.size(), c.size()};
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.lag_ns[i] >= lo_ns && c.lag_ns[i] <= hi_ns) {
      if (r.first == c.size()) r.first = i;
      r.last = i + 1;
    }
  }
  if (r.first == c.size()) r = {0, 0};
  return r;
}

}  // namespace photonstat
