#include "photonstat/fitters.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

#include "photonstat/error.hpp"

namespace photonstat::fitters {

namespace {

constexpr const char* kModule = "fitters";
constexpr int kMaxIter = 500;
constexpr double kRelTol = 1e-10;

using Residuals = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct ResidualFunctor : Eigen::DenseFunctor<double> {
  const Residuals* fn;
  ResidualFunctor(const Residuals& f, int n, int m) : Eigen::DenseFunctor<double>(n, m), fn(&f) {}
  int operator()(const InputType& x, ValueType& out) const {
    (*fn)(x, out);
    return 0;
  }
};

struct LmResult {
  Eigen::VectorXd x;
  double rss = 0.0;
  int iterations = 0;
  bool converged = false;
  Eigen::MatrixXd covariance;  ///< (J^T J)^-1 at the optimum
};

/// Central-difference Jacobian.
Eigen::MatrixXd jacobian(const Residuals& f, const Eigen::VectorXd& x, int m) {
  Eigen::MatrixXd j(m, x.size());
  Eigen::VectorXd up(m), down(m);
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(k)));
    Eigen::VectorXd xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    f(xp, up);
    f(xm, down);
    j.col(k) = (up - down) / (2.0 * h);
  }
  return j;
}

LmResult least_squares(const Residuals& f, Eigen::VectorXd x, int m) {
  const int n = static_cast<int>(x.size());
  ResidualFunctor functor(f, n, m);
  Eigen::NumericalDiff<ResidualFunctor, Eigen::Central> numdiff(functor);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<ResidualFunctor, Eigen::Central>> lm(numdiff);
  lm.setFtol(kRelTol);
  lm.setXtol(kRelTol);
  lm.setGtol(0.0);
  lm.setMaxfev(std::numeric_limits<int>::max() / 4);
  LmResult out;
  auto status = lm.minimizeInit(x);
  if (status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters) {
    do {
      status = lm.minimizeOneStep(x);
      ++out.iterations;
    } while (status == Eigen::LevenbergMarquardtSpace::Running && out.iterations < kMaxIter);
  }
  using namespace Eigen::LevenbergMarquardtSpace;
  out.converged = status == RelativeReductionTooSmall || status == RelativeErrorTooSmall ||
                  status == RelativeErrorAndReductionTooSmall || status == FtolTooSmall || status == XtolTooSmall;
  Eigen::VectorXd r(m);
  f(x, r);
  out.rss = r.squaredNorm();
  if (!std::isfinite(out.rss)) out.converged = false;
  const Eigen::MatrixXd j = jacobian(f, x, m);
  const Eigen::MatrixXd jtj = j.transpose() * j;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
  out.covariance = lu.isInvertible() ? Eigen::MatrixXd(lu.inverse())
                                     : Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::infinity());
  out.x = x;
  return out;
}

double lookup(const std::vector<std::pair<std::string, double>>& v, const std::string& name) {
  for (const auto& [k, x] : v) {
    if (k == name) return x;
  }
  throw Error(Errc::InvalidParams, kModule, "no parameter named " + name);
}

double weighted_rss(const Correlogram& c, const std::function<double(double)>& model) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double r = (model(c.lag_ns[i]) - c.values[i]) / c.stderr_[i];
    s += r * r;
  }
  return s;
}

void require_errors(const Correlogram& c) {
  for (double e : c.stderr_) {
    if (!(e > 0.0)) throw Error(Errc::InvalidParams, kModule, "every bin needs stderr > 0");
  }
  if (c.stderr_.size() != c.size()) throw Error(Errc::InvalidParams, kModule, "stderr missing");
}

}  // namespace

double FitReport::param(const std::string& name) const { return lookup(params, name); }
double FitReport::error(const std::string& name) const { return lookup(errors, name); }
bool FitReport::has(const std::string& name) const {
  return std::any_of(params.begin(), params.end(), [&](const auto& p) { return p.first == name; });
}

FitReport fit_g2(const Correlogram& c, int k_harmonics, const corrmodel::HarmonicG2Params& init) {
  if (k_harmonics < 1) throw Error(Errc::BadInit, kModule, "need at least one harmonic");
  const double tau_max = c.size() > 0 ? std::max(std::abs(c.lag_ns.front()), std::abs(c.lag_ns.back())) : 0.0;
  if (!init.valid(tau_max)) throw Error(Errc::BadInit, kModule, "initial g2 parameters are invalid");
  const auto n_par = static_cast<std::size_t>(2 + 2 * k_harmonics);
  if (c.size() < 5 * n_par) throw Error(Errc::InvalidParams, kModule, "too few bins for this many parameters");
  require_errors(c);

  // x = (decay, omega, c_1, s_1, ...), a cos(x + phi) = c cos x - s sin x
  Eigen::VectorXd x(static_cast<Eigen::Index>(n_par));
  x(0) = init.decay_rate;
  x(1) = init.omega;
  for (int k = 0; k < k_harmonics; ++k) {
    const corrmodel::Harmonic h = k < static_cast<int>(init.harmonics.size()) ? init.harmonics[k] : corrmodel::Harmonic{};
    x(2 + 2 * k) = h.amplitude * std::cos(h.phase);
    x(3 + 2 * k) = h.amplitude * std::sin(h.phase);
  }
  const int m = static_cast<int>(c.size());
  const Residuals f = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    r.resize(m);
    const double decay = std::abs(p(0));
    for (int i = 0; i < m; ++i) {
      const double t = std::abs(c.lag_ns[static_cast<std::size_t>(i)]);
      double s = 0.0;
      for (int k = 0; k < k_harmonics; ++k) {
        const double ph = (k + 1) * p(1) * t;
        s += p(2 + 2 * k) * std::cos(ph) - p(3 + 2 * k) * std::sin(ph);
      }
      const double model = 1.0 + std::exp(-decay * t) * s;
      r(i) = (model - c.values[static_cast<std::size_t>(i)]) / c.stderr_[static_cast<std::size_t>(i)];
    }
  };
  const LmResult lm = least_squares(f, x, m);

  FitReport rep;
  rep.residual_ss = lm.rss;
  rep.dof = std::max(1, m - static_cast<int>(n_par));
  rep.converged = lm.converged;
  rep.n_iter = lm.iterations;
  auto sd = [&](int i) { return std::sqrt(std::max(lm.covariance(i, i), 0.0)); };
  rep.params.emplace_back("decay_rate", std::abs(lm.x(0)));
  rep.errors.emplace_back("decay_rate", sd(0));
  rep.params.emplace_back("omega", std::abs(lm.x(1)));
  rep.errors.emplace_back("omega", sd(1));
  for (int k = 0; k < k_harmonics; ++k) {
    const int ic = 2 + 2 * k, is = 3 + 2 * k;
    double cc = lm.x(ic), ss = lm.x(is);
    if (lm.x(1) < 0.0) ss = -ss;  // cos is even; flip the sine part with omega
    const double a = std::hypot(cc, ss);
    const std::string idx = std::to_string(k + 1);
    // a = |(c, s)|, phi = atan2(s, c); first-order propagation with covariance
    double var_a = 0.0, var_phi = 0.0;
    if (a > 0.0) {
      const double vc = lm.covariance(ic, ic), vs = lm.covariance(is, is);
      const double cv = lm.covariance(ic, is) * (lm.x(1) < 0.0 ? -1.0 : 1.0);
      var_a = (cc * cc * vc + ss * ss * vs + 2.0 * cc * ss * cv) / (a * a);
      var_phi = (ss * ss * vc + cc * cc * vs - 2.0 * cc * ss * cv) / (a * a * a * a);
    }
    rep.params.emplace_back("a" + idx, a);
    rep.errors.emplace_back("a" + idx, std::sqrt(std::max(var_a, 0.0)));
    rep.params.emplace_back("phi" + idx, std::atan2(ss, cc));
    rep.errors.emplace_back("phi" + idx, std::sqrt(std::max(var_phi, 0.0)));
    rep.params.emplace_back("c" + idx, cc);
    rep.errors.emplace_back("c" + idx, sd(ic));
    rep.params.emplace_back("s" + idx, ss);
    rep.errors.emplace_back("s" + idx, sd(is));
  }
  if (!rep.converged) rep.note = "iteration limit or non-finite residual";
  return rep;
}

corrmodel::HarmonicG2Params initial_g2_guess(const Correlogram& c, int k_harmonics, double omega) {
  if (k_harmonics < 1 || !(omega > 0.0)) throw Error(Errc::BadInit, kModule, "need omega > 0 and K >= 1");
  require_errors(c);
  const auto m = static_cast<Eigen::Index>(c.size());
  const Eigen::Index n = 2 * k_harmonics;
  if (m < n) throw Error(Errc::InvalidParams, kModule, "too few bins for this many parameters");
  double span = 0.0;
  for (double t : c.lag_ns) span = std::max(span, std::abs(t));
  span = std::max(span, 1e-9);

  corrmodel::HarmonicG2Params best;
  double best_rss = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd a(m, n);
  Eigen::VectorXd y(m);
  for (int iw = -4; iw <= 4; ++iw) {
    const double w = omega * (1.0 + 0.005 * iw);
    for (int id = 0; id <= 40; ++id) {
      // 1e-3 to 30 e-foldings over the span
      const double decay = 1e-3 / span * std::pow(3e4, id / 40.0);
      for (Eigen::Index i = 0; i < m; ++i) {
        const double t = std::abs(c.lag_ns[static_cast<std::size_t>(i)]);
        const double env = std::exp(-decay * t) / c.stderr_[static_cast<std::size_t>(i)];
        for (int k = 0; k < k_harmonics; ++k) {
          a(i, 2 * k) = env * std::cos((k + 1) * w * t);
          a(i, 2 * k + 1) = -env * std::sin((k + 1) * w * t);
        }
        y(i) = (c.values[static_cast<std::size_t>(i)] - 1.0) / c.stderr_[static_cast<std::size_t>(i)];
      }
      const Eigen::VectorXd x = a.colPivHouseholderQr().solve(y);
      const double rss = (a * x - y).squaredNorm();
      if (rss < best_rss) {
        best_rss = rss;
        best.decay_rate = decay;
        best.omega = w;
        best.harmonics.clear();
        for (int k = 0; k < k_harmonics; ++k) {
          best.harmonics.push_back({std::hypot(x(2 * k), x(2 * k + 1)), std::atan2(x(2 * k + 1), x(2 * k))});
        }
      }
    }
  }
  for (int i = 0; i < 30 && !best.valid(span); ++i) {
    for (auto& h : best.harmonics) h.amplitude *= 0.8;
  }
  return best;
}

corrmodel::HarmonicG2Params g2_params(const FitReport& r) {
  corrmodel::HarmonicG2Params p;
  p.decay_rate = r.param("decay_rate");
  p.omega = r.param("omega");
  p.harmonics.clear();
  for (int k = 1; r.has("a" + std::to_string(k)); ++k) {
    p.harmonics.push_back({r.param("a" + std::to_string(k)), r.param("phi" + std::to_string(k))});
  }
  return p;
}

FitReport fit_delta_with(const Correlogram& c, const std::function<double(double, double)>& model,
                         double fastest_period, const DeltaScan& scan) {
  require_errors(c);
  if (c.size() < 2) throw Error(Errc::InvalidParams, kModule, "slice too short");
  const double tau_span = std::max(std::abs(c.lag_ns.front()), std::abs(c.lag_ns.back()));
  const double lo = std::max(0.0, scan.delta_min);
  const double hi = scan.delta_max > 0.0 ? scan.delta_max : 2.0 * tau_span;
  const double step = scan.step > 0.0 ? scan.step : fastest_period / 20.0;
  if (!(hi > lo) || !(step > 0.0)) throw Error(Errc::InvalidParams, kModule, "bad delta scan range");

  auto rss = [&](double d) { return weighted_rss(c, [&](double t) { return model(d, t); }); };
  const auto n_grid = static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1;
  std::vector<double> grid(n_grid), prof(n_grid);
  for (std::size_t i = 0; i < n_grid; ++i) {
    grid[i] = std::min(hi, lo + step * static_cast<double>(i));
    prof[i] = rss(grid[i]);
  }
  const auto best = static_cast<std::size_t>(std::min_element(prof.begin(), prof.end()) - prof.begin());
  const double worst = *std::max_element(prof.begin(), prof.end());

  const double a = grid[best > 0 ? best - 1 : 0];
  const double b = grid[std::min(best + 1, n_grid - 1)];
  boost::uintmax_t iters = 200;
  const auto [d_hat, rss_hat] = boost::math::tools::brent_find_minima(rss, a, b, 40, iters);

  FitReport rep;
  rep.params.emplace_back("delta", d_hat);
  rep.residual_ss = rss_hat;
  rep.dof = std::max<int>(1, static_cast<int>(c.size()) - 1);
  rep.n_iter = static_cast<int>(iters);
  // curvature of the residual sum gives var(delta) = 2 / rss''
  const double h = std::max(scan.tolerance, 1e-3 * step);
  const double curv = (rss(d_hat + h) - 2.0 * rss_hat + rss(d_hat - h)) / (h * h);
  rep.errors.emplace_back("delta", curv > 0.0 ? std::sqrt(2.0 / curv) : std::numeric_limits<double>::infinity());
  rep.converged = iters < 200 && (b - a) > 0.0;
  if (worst - prof[best] < 1.0) {
    rep.converged = false;
    rep.note = "flat residual profile";
  } else if (!rep.converged) {
    rep.note = "polish did not converge";
  }
  return rep;
}

namespace {

double fastest_period(const corrmodel::HarmonicG2Params& g2) {
  return 2.0 * std::numbers::pi / (g2.omega * static_cast<double>(g2.harmonics.size()));
}

}  // namespace

std::function<double(double, double)> g3_model(const corrmodel::HarmonicG2Params& g2, corrmodel::ModelKind kind,
                                               double window) {
  if (!(window > 0.0)) {
    return [g2, kind](double delta, double tau) {
      return corrmodel::eval_g3(corrmodel::G3Prediction{kind, delta, g2}, tau);
    };
  }
  return [g2, kind, window](double delta, double tau) {
    constexpr int kNodes = 16;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < kNodes; ++i) {
      const double d = delta + window * ((i + 0.5) / kNodes - 0.5);
      if (d < 0.0) continue;
      const double w = corrmodel::eval_g2(g2, d);
      if (!(w > 1e-12)) continue;
      num += w * corrmodel::eval_g3(corrmodel::G3Prediction{kind, d, g2}, tau);
      den += w;
    }
    return den > 0.0 ? num / den : corrmodel::eval_g2(g2, tau);
  };
}

FitReport fit_g3_delta(const Correlogram& c, const corrmodel::HarmonicG2Params& g2, corrmodel::ModelKind kind,
                       const DeltaScan& scan) {
  return fit_delta_with(c, g3_model(g2, kind, scan.delta_window), fastest_period(g2), scan);
}

DiscriminationReport compare_models(const Correlogram& c, const std::function<double(double, double)>& eq5,
                                    const std::function<double(double, double)>& eq8, double period,
                                    const DeltaScan& scan) {
  DiscriminationReport d;
  d.fit_eq5 = fit_delta_with(c, eq5, period, scan);
  d.fit_eq8 = fit_delta_with(c, eq8, period, scan);
  const double r8 = d.fit_eq8.residual_ss;
  d.ratio = r8 > 0.0 ? d.fit_eq5.residual_ss / r8 : std::numeric_limits<double>::infinity();
  d.preferred = d.fit_eq8.residual_ss < d.fit_eq5.residual_ss ? Preferred::Quantum_Eq8 : Preferred::Classical_Eq5;
  return d;
}

DiscriminationReport discriminate(const Correlogram& c, const corrmodel::HarmonicG2Params& g2, const DeltaScan& scan) {
  return compare_models(c, g3_model(g2, corrmodel::ModelKind::Classical_Eq5, scan.delta_window),
                        g3_model(g2, corrmodel::ModelKind::Quantum_Eq8, scan.delta_window), fastest_period(g2), scan);
}

FitReport fit_inverse_sqrt(const std::vector<std::pair<double, double>>& pts, bool fit_j0, double j0) {
  if (pts.size() < 3) throw Error(Errc::DomainError, kModule, "need at least three (j, T) points");
  double j_min = std::numeric_limits<double>::infinity();
  for (const auto& [j, t] : pts) {
    if (!(t > 0.0)) throw Error(Errc::DomainError, kModule, "periods must be positive");
    j_min = std::min(j_min, j);
  }
  if (!fit_j0 && !(j_min > j0)) throw Error(Errc::DomainError, kModule, "j must exceed j0");
  const int m = static_cast<int>(pts.size());

  // Straight line in log-log coordinates for a fixed offset.
  auto line_fit = [&](double off) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [j, t] : pts) {
      const double x = std::log(j - off), y = std::log(t);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return std::pair{(sy - slope * sx) / m, -slope};  // (log a, p)
  };

  // x = (log a, p[, u]) with j0 = j_min - exp(u) when the offset is free
  Eigen::VectorXd x(fit_j0 ? 3 : 2);
  double off0 = j0;
  if (fit_j0) {
    off0 = std::min(j0, j_min - 1e-3 * std::max(1.0, std::abs(j_min)));
    x(2) = std::log(j_min - off0);
  }
  const auto [la, p0] = line_fit(off0);
  x(0) = la;
  x(1) = p0;
  const Residuals f = [&](const Eigen::VectorXd& q, Eigen::VectorXd& r) {
    r.resize(m);
    const double off = fit_j0 ? j_min - std::exp(q(2)) : j0;
    for (int i = 0; i < m; ++i) {
      const auto& [j, t] = pts[static_cast<std::size_t>(i)];
      r(i) = std::log(t) - (q(0) - q(1) * std::log(j - off));
    }
  };
  const LmResult lm = least_squares(f, x, m);
  FitReport rep;
  rep.residual_ss = lm.rss;
  rep.dof = std::max(1, m - static_cast<int>(x.size()));
  rep.converged = lm.converged;
  rep.n_iter = lm.iterations;
  const double s2 = lm.rss / rep.dof;  // unit weights: scale by the residual variance
  auto sd = [&](int i) { return std::sqrt(std::max(lm.covariance(i, i) * s2, 0.0)); };
  const double a = std::exp(lm.x(0));
  rep.params.emplace_back("a", a);
  rep.errors.emplace_back("a", a * sd(0));
  rep.params.emplace_back("p", lm.x(1));
  rep.errors.emplace_back("p", sd(1));
  if (fit_j0) {
    const double e = std::exp(lm.x(2));
    rep.params.emplace_back("j0", j_min - e);
    rep.errors.emplace_back("j0", e * sd(2));
  } else {
    rep.params.emplace_back("j0", j0);
    rep.errors.emplace_back("j0", 0.0);
  }
  return rep;
}

}  // namespace photonstat::fitters
