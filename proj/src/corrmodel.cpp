#include "photonstat/corrmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "photonstat/error.hpp"

namespace photonstat::corrmodel {

namespace {
constexpr const char* kModule = "corrmodel";
}

bool HarmonicG2Params::valid(double tau_max) const {
  if (harmonics.empty() || !(decay_rate >= 0.0) || !(omega > 0.0)) return false;
  for (const auto& h : harmonics) {
    if (!std::isfinite(h.amplitude) || !std::isfinite(h.phase)) return false;
  }
  // Ten samples per period of the highest harmonic.
  const double step = 2.0 * std::numbers::pi / (omega * static_cast<double>(harmonics.size()) * 10.0);
  const auto n = static_cast<long>(std::min(1e6, std::ceil(tau_max / step)));
  for (long i = -n; i <= n; ++i) {
    if (eval_g2(*this, static_cast<double>(i) * step) < -1e-12) return false;
  }
  return true;
}

double eval_g2(const HarmonicG2Params& p, double tau) {
  // an autocorrelation is even, so the phase term sees |tau| as well
  const double t = std::abs(tau);
  double s = 0.0;
  for (std::size_t k = 0; k < p.harmonics.size(); ++k) {
    const double kk = static_cast<double>(k + 1);
    s += p.harmonics[k].amplitude * std::cos(kk * p.omega * t + p.harmonics[k].phase);
  }
  return 1.0 + std::exp(-p.decay_rate * t) * s;
}

const char* model_name(ModelKind kind) {
  return kind == ModelKind::Classical_Eq5 ? "classical" : "quantum";
}

double classical_g3(const G3Prediction& pred, double tau) {
  return eval_g2(pred.g2, tau) * eval_g2(pred.g2, tau + pred.delta);
}

double quantum_g3(const G3Prediction& pred, double tau) {
  const double gd = eval_g2(pred.g2, pred.delta);
  if (gd == 0.0) throw Error(Errc::DivisionByZero, kModule, "g2(delta) = 0");
  if (tau > 0.0) return eval_g2(pred.g2, tau);
  if (tau > -pred.delta) return eval_g2(pred.g2, tau) * eval_g2(pred.g2, pred.delta + tau) / gd;
  return eval_g2(pred.g2, pred.delta + tau);
}

double eval_g3(const G3Prediction& pred, double tau) {
  return pred.model_kind == ModelKind::Classical_Eq5 ? classical_g3(pred, tau) : quantum_g3(pred, tau);
}

VisibilityResult visibility(const Correlogram& c, std::pair<double, double> window) {
  const BinRange r = bins_in_window(c, window.first, window.second);
  if (r.size() == 0) throw Error(Errc::EmptyWindow, kModule, "no bins inside visibility window");
  const auto first = c.values.begin() + static_cast<long>(r.first);
  const auto last = c.values.begin() + static_cast<long>(r.last);
  const auto [lo, hi] = std::minmax_element(first, last);
  VisibilityResult out;
  out.g2_max = *hi;
  out.g2_min = *lo;
  out.window = window;
  const double sum = out.g2_max + out.g2_min;
  if (sum == 0.0) throw Error(Errc::DegenerateSum, kModule, "g2_max + g2_min = 0");
  out.v = (out.g2_max - out.g2_min) / sum;
  return out;
}

double rabi_period(double j_norm, double a, double j0) {
  if (!(j_norm > j0)) throw Error(Errc::DomainError, kModule, "j_norm must exceed j0");
  return a / std::sqrt(j_norm - j0);
}

}  // namespace photonstat::corrmodel
