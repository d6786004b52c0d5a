#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "photonstat/correlogram.hpp"
#include "photonstat/event_stream.hpp"

namespace photonstat::estimators {

/// Raw pair counts over lag bins centred on k * bin, |k| <= half_bins.
/// Lags are t_B - t_A in ticks; bin k covers [(k - 1/2) bin, (k + 1/2) bin).
struct PairHistogram {
  std::int64_t bin_ticks = 0;
  std::int64_t half_bins = 0;
  std::vector<std::uint64_t> counts;

  PairHistogram& operator+=(const PairHistogram& other);
};

/// Pairs whose A event has index in [a_first, a_last). Disjoint index ranges
/// give histograms that add up exactly to the full one. When `same` is true
/// the streams are the same realization and zero-distance self pairs are skipped.
PairHistogram pair_histogram(const EventStream& a, const EventStream& b, std::int64_t bin_ticks,
                             std::int64_t half_bins, std::size_t a_first, std::size_t a_last, bool same);

/// g2 of t_B - t_A: counts / (N_A N_B / T^2 * bin * (T - |tau|)), Poisson errors.
/// Passing the same object twice gives the autocorrelation without self pairs.
Correlogram estimate_g2(const EventStream& a, const EventStream& b, double bin_ns, double max_lag_ns);

/// Cross-correlation of two distinct streams (same estimator).
Correlogram estimate_cross_g2(const EventStream& si, const EventStream& sj, double bin_ns, double max_lag_ns);

/// Binning of a third-order map: delta rows cover
/// [delta_lo + i delta_bin, delta_lo + (i + 1) delta_bin), tau columns are
/// centred on k * tau_bin for |k| <= tau_max / tau_bin.
struct G3Binning {
  double delta_lo = 0.0;
  double delta_bin = 8.0;
  std::size_t n_delta = 1;
  double tau_bin = 1.0;
  double tau_max = 100.0;
};

struct G3Map {
  std::vector<double> delta_grid;  ///< row centres, ns
  std::vector<double> tau_grid;    ///< column centres, ns
  std::vector<std::vector<double>> values;   ///< <I1 I2 I3> / (<I1><I2><I3>)
  std::vector<std::vector<double>> stderr_;
  std::vector<std::vector<std::uint64_t>> counts;
  std::vector<std::uint64_t> pairs12;  ///< (t1, t2) pairs per row
  double delta_bin = 0.0;
  double tau_bin = 0.0;
  double livetime = 0.0;  ///< span of t2 values used, ns
  double rate3 = 0.0;     ///< counts/ns

  /// Row divided by its own pair rate, i.e. g3(delta, tau) / g2(delta): the
  /// probability density of a third photon given the first two.
  Correlogram conditional_slice(std::size_t row) const;
  /// Row in the plain normalization.
  Correlogram slice(std::size_t row) const;
};

/// Triple coincidences t1 < t2 (delta = t2 - t1) and t3 (tau = t3 - t2).
/// The same stream may be passed in several roles; identical events are then
/// never paired with themselves.
G3Map estimate_g3_map(const EventStream& s1, const EventStream& s2, const EventStream& s3, const G3Binning& bins);

struct HarmonicSpectrum {
  std::vector<double> freq_grid;   ///< rad/ns
  std::vector<double> amplitudes;  ///< amplitude spectrum of (g2 - 1)
  double fundamental = 0.0;        ///< rad/ns, 0 when not found
  bool found = false;
  std::vector<double> harmonic_amps;  ///< k = 1..K, empty when not found
  std::string window = "hann";
};

/// Hann-windowed, 16x zero-padded amplitude spectrum of (values - 1). A
/// correlogram starting at lag 0 is mirrored to negative lags first. The
/// fundamental is the largest peak beyond the zero-frequency lobe; harmonic k
/// is the local maximum nearest k * fundamental, both refined by a parabola
/// through three bins. GridNotUniform on irregular lags.
HarmonicSpectrum fourier_spectrum(const Correlogram& c, int n_harmonics = 4);

}  // namespace photonstat::estimators
