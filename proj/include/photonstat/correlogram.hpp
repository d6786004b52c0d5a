#pragma once

#include <cstdint>
#include <vector>

namespace photonstat {

/// Binned estimate of g2(tau) or of a tau-slice of g3(delta, tau).
/// lag_ns holds bin centres on a uniform grid.
struct Correlogram {
  std::vector<double> lag_ns;
  std::vector<double> values;
  std::vector<double> stderr_;
  std::vector<std::uint64_t> counts;
  double bin_width_ns = 0.0;
  std::uint64_t total_pairs = 0;

  std::size_t size() const { return lag_ns.size(); }

  /// Uniform spacing within a relative tolerance.
  bool uniform(double rel_tol = 1e-6) const;
};

/// Index range [first, last) of bins whose centre lies in [lo, hi].
struct BinRange {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t size() const { return last - first; }
};

BinRange bins_in_window(const Correlogram& c, double lo_ns, double hi_ns);

}  // namespace photonstat
