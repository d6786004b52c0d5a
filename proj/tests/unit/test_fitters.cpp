#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "photonstat/error.hpp"
#include "photonstat/fitters.hpp"

using namespace photonstat;
using namespace photonstat::fitters;
using corrmodel::HarmonicG2Params;
using corrmodel::ModelKind;

namespace {

constexpr double kPi = std::numbers::pi;

HarmonicG2Params truth() {
  HarmonicG2Params p;
  p.decay_rate = 0.03;
  p.omega = 2.0 * kPi / 25.0;
  p.harmonics = {{0.7, 0.2}, {0.25, -0.4}};
  return p;
}

Correlogram noisy(const HarmonicG2Params& p, double rel_noise, std::uint64_t seed, double lo = -150.0,
                  double hi = 150.0, double dt = 0.5) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  Correlogram c;
  for (double t = lo; t <= hi + 1e-9; t += dt) {
    const double v = corrmodel::eval_g2(p, t);
    const double s = rel_noise * v;
    c.lag_ns.push_back(t);
    c.values.push_back(v + (rel_noise > 0.0 ? s * n01(eng) : 0.0));
    c.stderr_.push_back(rel_noise > 0.0 ? s : 0.01);
  }
  return c;
}

Correlogram g3_slice(ModelKind kind, double delta, const HarmonicG2Params& g2, double tau_lo, double tau_hi) {
  Correlogram c;
  const corrmodel::G3Prediction pred{kind, delta, g2};
  for (double t = tau_lo; t <= tau_hi + 1e-9; t += 1.0) {
    c.lag_ns.push_back(t);
    c.values.push_back(corrmodel::eval_g3(pred, t));
    c.stderr_.push_back(0.02);
  }
  return c;
}

}  // namespace

TEST_CASE("g2 fit recovers known parameters") {
  const auto p = truth();
  const auto c = noisy(p, 0.01, 42);
  auto init = p;
  init.omega *= 1.03;
  init.decay_rate = 0.05;
  init.harmonics = {{0.5, 0.0}, {0.1, 0.0}};
  const auto r = fit_g2(c, 2, init);
  CHECK(r.converged);
  CHECK(r.n_iter <= 500);
  CHECK(r.dof == static_cast<int>(c.size()) - 6);
  CHECK(std::abs(r.param("omega") - p.omega) < 3.0 * r.error("omega"));
  CHECK(std::abs(r.param("decay_rate") - p.decay_rate) < 3.0 * r.error("decay_rate"));
  CHECK(std::abs(r.param("a1") - 0.7) < 3.0 * r.error("a1"));
  CHECK(std::abs(r.param("a2") - 0.25) < 3.0 * r.error("a2"));
  CHECK(std::abs(r.param("phi1") - 0.2) < 3.0 * r.error("phi1"));
  CHECK(std::abs(r.param("phi2") + 0.4) < 3.0 * r.error("phi2"));
  CHECK(r.residual_ss / r.dof == doctest::Approx(1.0).epsilon(0.15));
  const auto back = g2_params(r);
  CHECK(back.harmonics.size() == 2);
  CHECK(corrmodel::eval_g2(back, 3.0) == doctest::Approx(corrmodel::eval_g2(p, 3.0)).epsilon(0.01));
}

TEST_CASE("g2 fit of flat data") {
  HarmonicG2Params flat;
  flat.omega = 0.3;
  flat.harmonics = {{0.0, 0.0}};
  const auto c = noisy(flat, 0.01, 3);
  HarmonicG2Params init;
  init.omega = 0.3;
  init.decay_rate = 0.01;
  init.harmonics = {{0.05, 0.0}};
  const auto r = fit_g2(c, 1, init);
  CHECK(std::abs(r.param("c1")) < 3.0 * r.error("c1"));
  CHECK(std::abs(r.param("s1")) < 3.0 * r.error("s1") + 1e-6);
}

TEST_CASE("g2 fit is scale invariant in its residuals") {
  const auto c = noisy(truth(), 0.01, 5);
  Correlogram scaled = c;
  for (std::size_t i = 0; i < c.size(); ++i) {
    scaled.values[i] *= 3.0;
    scaled.stderr_[i] *= 3.0;
  }
  // the model has a fixed baseline, so compare the delta fit instead, whose
  // residual sum only sees (model - value) / stderr at fixed parameters
  auto model = [](double, double) { return 1.0; };
  const auto a = fit_delta_with(c, model, 10.0, {0.0, 10.0});
  auto model3 = [](double, double) { return 3.0; };
  const auto b = fit_delta_with(scaled, model3, 10.0, {0.0, 10.0});
  CHECK(a.residual_ss == doctest::Approx(b.residual_ss).epsilon(1e-12));
}

TEST_CASE("g2 fit input checks") {
  auto bad = truth();
  bad.omega = -1.0;
  CHECK_THROWS_AS(fit_g2(noisy(truth(), 0.01, 1), 2, bad), Error);
  const auto short_c = noisy(truth(), 0.01, 1, 0.0, 10.0, 1.0);
  CHECK_THROWS_AS(fit_g2(short_c, 2, truth()), Error);
}

TEST_CASE("delta fit recovers synthetic delays") {
  HarmonicG2Params g2;
  g2.decay_rate = 0.01;
  g2.omega = 2.0 * kPi / 40.0;
  g2.harmonics = {{0.6, 0.0}, {0.2, 0.0}};
  const auto c5 = g3_slice(ModelKind::Classical_Eq5, 265.0, g2, -400.0, 100.0);
  const auto r5 = fit_g3_delta(c5, g2, ModelKind::Classical_Eq5, {0.0, 500.0});
  CHECK(r5.converged);
  CHECK(std::abs(r5.param("delta") - 265.0) < 1e-3);

  const auto c8 = g3_slice(ModelKind::Quantum_Eq8, 75.0, g2, -150.0, 100.0);
  const auto r8 = fit_g3_delta(c8, g2, ModelKind::Quantum_Eq8, {0.0, 300.0});
  CHECK(r8.converged);
  CHECK(std::abs(r8.param("delta") - 75.0) < 1e-3);
}

TEST_CASE("delta fit on a flat slice is flagged") {
  HarmonicG2Params g2;
  g2.omega = 0.2;
  g2.harmonics = {{0.3, 0.0}};
  Correlogram c;
  std::mt19937_64 eng(1);
  std::normal_distribution<double> n01(0.0, 0.02);
  for (double t = -100.0; t <= 100.0; t += 1.0) {
    c.lag_ns.push_back(t);
    c.values.push_back(1.0 + n01(eng));
    c.stderr_.push_back(0.02);
  }
  HarmonicG2Params none = g2;
  none.harmonics = {{0.0, 0.0}};
  const auto r = fit_g3_delta(c, none, ModelKind::Classical_Eq5);
  CHECK_FALSE(r.converged);
  CHECK(r.note == "flat residual profile");
}

TEST_CASE("discrimination prefers the generating model") {
  HarmonicG2Params g2;
  g2.decay_rate = 0.04;
  g2.omega = 2.0 * kPi / 30.0;
  g2.harmonics = {{0.8, 0.0}};
  const DeltaScan scan{0.0, 200.0};
  const auto q = g3_slice(ModelKind::Quantum_Eq8, 40.0, g2, -120.0, 80.0);
  const auto dq = discriminate(q, g2, scan);
  CHECK(dq.preferred == Preferred::Quantum_Eq8);
  CHECK(dq.ratio > 1.0);
  const auto c = g3_slice(ModelKind::Classical_Eq5, 40.0, g2, -120.0, 80.0);
  const auto dc = discriminate(c, g2, scan);
  CHECK(dc.preferred == Preferred::Classical_Eq5);

  // swapping the evaluators swaps the verdict and inverts the ratio
  auto m5 = [&](double d, double t) { return corrmodel::eval_g3({ModelKind::Classical_Eq5, d, g2}, t); };
  auto m8 = [&](double d, double t) { return corrmodel::eval_g3({ModelKind::Quantum_Eq8, d, g2}, t); };
  const auto swapped = compare_models(q, m8, m5, 30.0, scan);
  CHECK(swapped.preferred == Preferred::Classical_Eq5);
  CHECK(swapped.ratio == doctest::Approx(1.0 / dq.ratio).epsilon(1e-9));

  // far apart delays: both models agree
  const auto far = g3_slice(ModelKind::Classical_Eq5, 400.0, g2, -450.0, 50.0);
  const auto dfar = discriminate(far, g2, {300.0, 500.0});
  CHECK(std::abs(dfar.fit_eq5.param("delta") - 400.0) < 1e-3);
}

TEST_CASE("inverse square root fit") {
  std::vector<std::pair<double, double>> exact;
  for (double j = 1.2; j <= 10.0; j += 0.6) exact.emplace_back(j, 10.0 / std::sqrt(j));
  const auto r = fit_inverse_sqrt(exact, false);
  CHECK(std::abs(r.param("p") - 0.5) < 1e-6);
  CHECK(r.param("a") == doctest::Approx(10.0).epsilon(1e-9));

  std::vector<std::pair<double, double>> shifted;
  for (double j = 1.2; j <= 10.0; j += 0.6) shifted.emplace_back(j, 4.0 / std::sqrt(j - 1.0));
  const auto s = fit_inverse_sqrt(shifted, true);
  CHECK(std::abs(s.param("p") - 0.5) < 1e-6);
  CHECK(std::abs(s.param("j0") - 1.0) < 1e-6);

  CHECK_THROWS_AS(fit_inverse_sqrt({{1.0, 1.0}, {2.0, 0.7}}, false), Error);
  CHECK_THROWS_AS(fit_inverse_sqrt({{0.5, 1.0}, {2.0, 0.7}, {3.0, 0.5}}, false, 1.0), Error);
}

TEST_CASE("inverse square root fit with 5 percent noise") {
  std::mt19937_64 eng(2024);
  std::normal_distribution<double> n01(0.0, 1.0);
  double sum = 0.0, sum_sq = 0.0;
  const int draws = 100;
  for (int d = 0; d < draws; ++d) {
    std::vector<std::pair<double, double>> pts;
    for (double j = 1.2; j <= 10.0; j += 0.4) pts.emplace_back(j, 10.0 / std::sqrt(j) * (1.0 + 0.05 * n01(eng)));
    const double p = fit_inverse_sqrt(pts, false).param("p");
    sum += p;
    sum_sq += p * p;
  }
  const double mean = sum / draws;
  const double sd = std::sqrt(sum_sq / draws - mean * mean);
  CHECK(std::abs(mean - 0.5) < 0.05);
  CHECK(sd < 0.05);
}
