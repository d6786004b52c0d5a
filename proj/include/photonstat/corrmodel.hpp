#pragma once

#include <utility>
#include <vector>

#include "photonstat/correlogram.hpp"

namespace photonstat::corrmodel {

struct Harmonic {
  double amplitude = 0.0;
  double phase = 0.0;  ///< rad
};

/// g2(tau) = 1 + exp(-decay_rate |tau|) * sum_k a_k cos(k omega |tau| + phi_k).
/// The phase term also sees |tau|, which keeps the curve even for any phase.
struct HarmonicG2Params {
  double decay_rate = 0.0;  ///< 1/ns
  double omega = 1.0;       ///< rad/ns
  std::vector<Harmonic> harmonics{Harmonic{}};

  /// K >= 1, decay >= 0, omega > 0, and g2 >= 0 sampled on [-tau_max, tau_max].
  bool valid(double tau_max = 100.0) const;
};

double eval_g2(const HarmonicG2Params& p, double tau_ns);

enum class ModelKind { Classical_Eq5, Quantum_Eq8 };

const char* model_name(ModelKind kind);

struct G3Prediction {
  ModelKind model_kind = ModelKind::Classical_Eq5;
  double delta = 0.0;  ///< ns
  HarmonicG2Params g2;
};

/// g2(tau) * g2(tau + delta); the factorized form expected for classical light.
double classical_g3(const G3Prediction& pred, double tau_ns);

/// Jump-erasure form. Regions are half-open: tau > 0, -delta < tau <= 0, tau <= -delta.
/// Throws DivisionByZero when g2(delta) = 0.
double quantum_g3(const G3Prediction& pred, double tau_ns);

/// Dispatches on pred.model_kind.
double eval_g3(const G3Prediction& pred, double tau_ns);

struct VisibilityResult {
  double v = 0.0;
  double g2_max = 0.0;
  double g2_min = 0.0;
  std::pair<double, double> window{0.0, 0.0};
};

/// (g2_max - g2_min) / (g2_max + g2_min) over bins with centres inside window.
VisibilityResult visibility(const Correlogram& c, std::pair<double, double> window_ns);

/// a * (j_norm - j0)^(-1/2); DomainError when j_norm <= j0.
double rabi_period(double j_norm, double a_ns, double j0 = 0.0);

}  // namespace photonstat::corrmodel
