#include "photonstat/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <unsupported/Eigen/FFT>

#include "photonstat/error.hpp"
#include "photonstat/parallel.hpp"

namespace photonstat::estimators {

namespace {

constexpr const char* kModule = "estimators";
constexpr std::size_t kChunk = 1 << 16;

std::int64_t ticks_of(double ns, const EventStream& s) {
  return std::llround(ns * 1e3 / static_cast<double>(s.resolution_ps));
}

/// Bin index of a lag for bins centred on multiples of `bin`.
std::int64_t centred_bin(std::int64_t lag, std::int64_t bin) {
  const std::int64_t num = 2 * lag + bin;
  const std::int64_t den = 2 * bin;
  return num >= 0 ? num / den : -((-num + den - 1) / den);
}

void require_events(const EventStream& s, const char* what) {
  if (s.empty()) throw Error(Errc::EmptyStream, kModule, std::string(what) + " stream is empty");
}

/// Parabola through (-1, a), (0, b), (1, c): vertex offset and height.
std::pair<double, double> parabolic(double a, double b, double c) {
  const double den = a - 2.0 * b + c;
  const double p = den != 0.0 ? 0.5 * (a - c) / den : 0.0;
  return {p, b - 0.25 * (a - c) * p};
}

}  // namespace

PairHistogram& PairHistogram::operator+=(const PairHistogram& other) {
  if (counts.size() != other.counts.size()) throw Error(Errc::InvalidParams, kModule, "histogram shapes differ");
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  return *this;
}

PairHistogram pair_histogram(const EventStream& a, const EventStream& b, std::int64_t bin, std::int64_t half_bins,
                             std::size_t a_first, std::size_t a_last, bool same) {
  PairHistogram h;
  h.bin_ticks = bin;
  h.half_bins = half_bins;
  h.counts.assign(static_cast<std::size_t>(2 * half_bins + 1), 0);
  if (a_first >= a_last || b.empty()) return h;
  const std::int64_t span2 = (2 * half_bins + 1) * bin;  // twice the half-width of the lag window
  const auto& tb = b.timestamps;
  auto first_inside = [&](std::int64_t ta) {
    // first B event with 2 (tB - tA) >= -span2
    const std::int64_t lo2 = 2 * ta - span2;
    return static_cast<std::size_t>(std::partition_point(tb.begin(), tb.end(), [&](std::uint64_t t) {
                                      return 2 * static_cast<std::int64_t>(t) < lo2;
                                    }) - tb.begin());
  };
  std::size_t lo = first_inside(static_cast<std::int64_t>(a.timestamps[a_first]));
  for (std::size_t i = a_first; i < a_last; ++i) {
    const auto ta = static_cast<std::int64_t>(a.timestamps[i]);
    while (lo < tb.size() && 2 * (static_cast<std::int64_t>(tb[lo]) - ta) < -span2) ++lo;
    for (std::size_t j = lo; j < tb.size(); ++j) {
      const std::int64_t lag = static_cast<std::int64_t>(tb[j]) - ta;
      if (2 * lag >= span2) break;
      if (same && j == i) continue;
      ++h.counts[static_cast<std::size_t>(centred_bin(lag, bin) + half_bins)];
    }
  }
  return h;
}

Correlogram estimate_g2(const EventStream& a, const EventStream& b, double bin_ns, double max_lag_ns) {
  require_events(a, "first");
  require_events(b, "second");
  if (!(bin_ns > 0.0) || !(max_lag_ns >= 0.0)) throw Error(Errc::InvalidParams, kModule, "bin and max_lag");
  const std::int64_t bin = ticks_of(bin_ns, a);
  if (bin <= 0) throw Error(Errc::InvalidParams, kModule, "bin shorter than one tick");
  const auto half_bins = static_cast<std::int64_t>(std::floor(max_lag_ns / bin_ns + 1e-9));
  const bool same = &a == &b;

  const std::size_t n_chunks = (a.size() + kChunk - 1) / kChunk;
  std::vector<PairHistogram> parts(n_chunks);
  parallel_for(n_chunks, [&](std::size_t c) {
    parts[c] = pair_histogram(a, b, bin, half_bins, c * kChunk, std::min(a.size(), (c + 1) * kChunk), same);
  });
  PairHistogram total = pair_histogram(a, b, bin, half_bins, 0, 0, same);
  for (const auto& p : parts) total += p;

  const double t_obs = std::min(a.duration_ns(), b.duration_ns());
  if (!(t_obs > 0.0)) throw Error(Errc::InvalidParams, kModule, "zero observation window");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size()) - (same ? 1.0 : 0.0);
  const double bin_real = static_cast<double>(bin) * a.tick_ns();
  Correlogram c;
  c.bin_width_ns = bin_real;
  for (std::int64_t k = -half_bins; k <= half_bins; ++k) {
    const double tau = static_cast<double>(k) * bin_real;
    const auto n = total.counts[static_cast<std::size_t>(k + half_bins)];
    const double expected = na * nb / (t_obs * t_obs) * bin_real * std::max(t_obs - std::abs(tau), 0.0);
    c.lag_ns.push_back(tau);
    c.counts.push_back(n);
    c.values.push_back(expected > 0.0 ? static_cast<double>(n) / expected : 0.0);
    c.stderr_.push_back(expected > 0.0 ? std::sqrt(std::max(static_cast<double>(n), 1.0)) / expected : 0.0);
    c.total_pairs += n;
  }
  return c;
}

Correlogram estimate_cross_g2(const EventStream& si, const EventStream& sj, double bin_ns, double max_lag_ns) {
  return estimate_g2(si, sj, bin_ns, max_lag_ns);
}

Correlogram G3Map::slice(std::size_t row) const {
  Correlogram c;
  c.bin_width_ns = tau_bin;
  c.lag_ns = tau_grid;
  c.values = values.at(row);
  c.stderr_ = stderr_.at(row);
  c.counts = counts.at(row);
  for (auto n : c.counts) c.total_pairs += n;
  return c;
}

Correlogram G3Map::conditional_slice(std::size_t row) const {
  Correlogram c = slice(row);
  const double base = static_cast<double>(pairs12.at(row)) * rate3 * tau_bin;
  if (!(base > 0.0)) throw Error(Errc::ZeroBaseline, kModule, "no (t1, t2) pairs in this delta row");
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double n = static_cast<double>(c.counts[k]);
    c.values[k] = n / base;
    c.stderr_[k] = std::sqrt(std::max(n, 1.0)) / base;
  }
  return c;
}

G3Map estimate_g3_map(const EventStream& s1, const EventStream& s2, const EventStream& s3, const G3Binning& bins) {
  require_events(s1, "first");
  require_events(s2, "second");
  require_events(s3, "third");
  if (!(bins.delta_bin > 0.0) || !(bins.tau_bin > 0.0) || bins.n_delta == 0 || !(bins.delta_lo >= 0.0)) {
    throw Error(Errc::InvalidParams, kModule, "bad g3 binning");
  }
  const std::int64_t d_lo = ticks_of(bins.delta_lo, s2);
  const std::int64_t d_bin = ticks_of(bins.delta_bin, s2);
  const std::int64_t t_bin = ticks_of(bins.tau_bin, s2);
  if (d_bin <= 0 || t_bin <= 0) throw Error(Errc::InvalidParams, kModule, "bins shorter than one tick");
  const auto n_delta = static_cast<std::int64_t>(bins.n_delta);
  const std::int64_t d_hi = d_lo + n_delta * d_bin;
  const auto half = static_cast<std::int64_t>(std::floor(bins.tau_max / bins.tau_bin + 1e-9));
  const std::int64_t n_tau = 2 * half + 1;
  const std::int64_t span2 = n_tau * t_bin;  // twice the tau half-width
  const bool same12 = &s1 == &s2, same13 = &s1 == &s3, same23 = &s2 == &s3;

  const auto t_end = static_cast<std::int64_t>(std::min({s1.duration, s2.duration, s3.duration}));
  const std::int64_t margin = (span2 + 1) / 2;
  const std::int64_t lo_t2 = std::max(d_hi, margin);
  const std::int64_t hi_t2 = t_end - margin;
  if (hi_t2 <= lo_t2) throw Error(Errc::InvalidParams, kModule, "streams shorter than the g3 window");

  const auto& ts2 = s2.timestamps;
  const auto first2 = static_cast<std::size_t>(
      std::lower_bound(ts2.begin(), ts2.end(), static_cast<std::uint64_t>(lo_t2)) - ts2.begin());
  const auto last2 = static_cast<std::size_t>(
      std::upper_bound(ts2.begin(), ts2.end(), static_cast<std::uint64_t>(hi_t2)) - ts2.begin());

  struct Part {
    std::vector<std::uint64_t> counts;
    std::vector<std::uint64_t> pairs;
  };
  const std::size_t n_items = last2 > first2 ? last2 - first2 : 0;
  const std::size_t n_chunks = (n_items + kChunk - 1) / kChunk;
  std::vector<Part> parts(n_chunks);
  parallel_for(n_chunks, [&](std::size_t c) {
    Part& part = parts[c];
    part.counts.assign(static_cast<std::size_t>(n_delta * n_tau), 0);
    part.pairs.assign(static_cast<std::size_t>(n_delta), 0);
    const std::size_t j_begin = first2 + c * kChunk, j_end = std::min(last2, j_begin + kChunk);
    const auto& t1s = s1.timestamps;
    const auto& t3s = s3.timestamps;
    const auto t2_first = static_cast<std::int64_t>(ts2[j_begin]);
    // t1 window (t2 - d_hi, t2 - d_lo], t3 window 2 |t3 - t2| < span2 (left-closed)
    auto i1 = static_cast<std::size_t>(std::partition_point(t1s.begin(), t1s.end(), [&](std::uint64_t t) {
                                         return static_cast<std::int64_t>(t) <= t2_first - d_hi;
                                       }) - t1s.begin());
    auto i3 = static_cast<std::size_t>(std::partition_point(t3s.begin(), t3s.end(), [&](std::uint64_t t) {
                                         return 2 * (static_cast<std::int64_t>(t) - t2_first) < -span2;
                                       }) - t3s.begin());
    std::vector<std::pair<std::size_t, std::int64_t>> ones;  // (index, row)
    std::vector<std::pair<std::size_t, std::int64_t>> threes;  // (index, column)
    for (std::size_t j = j_begin; j < j_end; ++j) {
      const auto t2 = static_cast<std::int64_t>(ts2[j]);
      while (i1 < t1s.size() && static_cast<std::int64_t>(t1s[i1]) <= t2 - d_hi) ++i1;
      while (i3 < t3s.size() && 2 * (static_cast<std::int64_t>(t3s[i3]) - t2) < -span2) ++i3;
      ones.clear();
      for (std::size_t i = i1; i < t1s.size(); ++i) {
        const std::int64_t delta = t2 - static_cast<std::int64_t>(t1s[i]);
        if (delta < d_lo) break;
        if (same12 && i == j) continue;
        ones.emplace_back(i, (delta - d_lo) / d_bin);
      }
      if (ones.empty()) continue;
      for (const auto& o : ones) ++part.pairs[static_cast<std::size_t>(o.second)];
      threes.clear();
      for (std::size_t k = i3; k < t3s.size(); ++k) {
        const std::int64_t lag = static_cast<std::int64_t>(t3s[k]) - t2;
        if (2 * lag >= span2) break;
        if (same23 && k == j) continue;
        threes.emplace_back(k, centred_bin(lag, t_bin) + half);
      }
      for (const auto& o : ones) {
        for (const auto& t : threes) {
          if (same13 && o.first == t.first) continue;
          ++part.counts[static_cast<std::size_t>(o.second * n_tau + t.second)];
        }
      }
    }
  });

  G3Map m;
  m.delta_bin = static_cast<double>(d_bin) * s2.tick_ns();
  m.tau_bin = static_cast<double>(t_bin) * s2.tick_ns();
  m.livetime = static_cast<double>(hi_t2 - lo_t2) * s2.tick_ns();
  const double t_obs = static_cast<double>(t_end) * s2.tick_ns();
  const double r1 = static_cast<double>(s1.size()) / t_obs;
  const double r2 = static_cast<double>(s2.size()) / t_obs;
  m.rate3 = static_cast<double>(s3.size()) / t_obs;
  const double norm = r1 * r2 * m.rate3 * m.delta_bin * m.tau_bin * m.livetime;
  for (std::int64_t r = 0; r < n_delta; ++r) {
    m.delta_grid.push_back((static_cast<double>(d_lo + r * d_bin) + 0.5 * static_cast<double>(d_bin)) * s2.tick_ns());
  }
  for (std::int64_t k = -half; k <= half; ++k) m.tau_grid.push_back(static_cast<double>(k) * m.tau_bin);
  m.counts.assign(static_cast<std::size_t>(n_delta), std::vector<std::uint64_t>(static_cast<std::size_t>(n_tau), 0));
  m.pairs12.assign(static_cast<std::size_t>(n_delta), 0);
  for (const auto& part : parts) {
    for (std::int64_t r = 0; r < n_delta; ++r) {
      m.pairs12[static_cast<std::size_t>(r)] += part.pairs[static_cast<std::size_t>(r)];
      for (std::int64_t k = 0; k < n_tau; ++k) {
        m.counts[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] +=
            part.counts[static_cast<std::size_t>(r * n_tau + k)];
      }
    }
  }
  m.values.resize(m.counts.size());
  m.stderr_.resize(m.counts.size());
  for (std::size_t r = 0; r < m.counts.size(); ++r) {
    for (auto n : m.counts[r]) {
      const double x = static_cast<double>(n);
      m.values[r].push_back(x / norm);
      m.stderr_[r].push_back(std::sqrt(std::max(x, 1.0)) / norm);
    }
  }
  return m;
}

HarmonicSpectrum fourier_spectrum(const Correlogram& c, int n_harmonics) {
  if (!c.uniform() || c.size() < 4) throw Error(Errc::GridNotUniform, kModule, "spectrum needs a uniform lag grid");
  const double dt = c.lag_ns[1] - c.lag_ns[0];
  std::vector<double> y;
  std::vector<double> err;
  if (std::abs(c.lag_ns.front()) < 1e-9 * dt) {
    // one-sided: mirror to negative lags
    for (std::size_t i = c.size() - 1; i >= 1; --i) {
      y.push_back(c.values[i] - 1.0);
      err.push_back(c.stderr_.empty() ? 0.0 : c.stderr_[i]);
    }
  }
  for (std::size_t i = 0; i < c.size(); ++i) {
    y.push_back(c.values[i] - 1.0);
    err.push_back(c.stderr_.empty() ? 0.0 : c.stderr_[i]);
  }
  const std::size_t n = y.size();
  constexpr std::size_t kPad = 16;
  const std::size_t n_fft = n * kPad;
  std::vector<double> buf(n_fft, 0.0);
  double w_sum = 0.0, w2_sum = 0.0, err_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1)));
    buf[i] = w * y[i];
    w_sum += w;
    w2_sum += w * w;
    err_mean += err[i] / static_cast<double>(n);
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, buf);

  HarmonicSpectrum out;
  const std::size_t m = n_fft / 2;
  const double dw = 2.0 * std::numbers::pi / (static_cast<double>(n_fft) * dt);
  out.freq_grid.resize(m);
  out.amplitudes.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    out.freq_grid[k] = dw * static_cast<double>(k);
    out.amplitudes[k] = std::abs(spec[k]) * 2.0 / w_sum;
  }
  const auto& amp = out.amplitudes;
  std::size_t k0 = 1;
  while (k0 + 1 < m && amp[k0 + 1] < amp[k0]) ++k0;  // leave the zero-frequency lobe
  if (k0 + 2 >= m) return out;
  const auto peak = static_cast<std::size_t>(std::max_element(amp.begin() + static_cast<long>(k0), amp.end() - 1) -
                                             amp.begin());
  if (peak == 0 || peak + 1 >= m) return out;
  const auto [off1, a1] = parabolic(amp[peak - 1], amp[peak], amp[peak + 1]);
  // significance against counting noise propagated through the window
  const double noise = 2.0 * err_mean * std::sqrt(w2_sum) / w_sum;
  if (!(a1 > std::max(5.0 * noise, 1e-12))) return out;
  const double k1 = static_cast<double>(peak) + off1;
  out.found = true;
  out.fundamental = dw * k1;
  out.harmonic_amps.push_back(a1);
  const auto half = static_cast<long>(kPad / 2);
  for (int h = 2; h <= n_harmonics; ++h) {
    const long kk = std::lround(k1 * h);
    if (kk + half + 1 >= static_cast<long>(m)) {
      out.harmonic_amps.push_back(0.0);
      continue;
    }
    const long lo = kk - half, hi = kk + half;
    long best = lo;
    for (long k = lo; k <= hi; ++k) {
      if (amp[static_cast<std::size_t>(k)] > amp[static_cast<std::size_t>(best)]) best = k;
    }
    double a = amp[static_cast<std::size_t>(kk)];
    if (best > lo && best < hi) {
      const auto b = static_cast<std::size_t>(best);
      a = parabolic(amp[b - 1], amp[b], amp[b + 1]).second;
    }
    out.harmonic_amps.push_back(std::max(a, 0.0));
  }
  return out;
}

}  // namespace photonstat::estimators
