#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "photonstat/corrmodel.hpp"
#include "photonstat/correlogram.hpp"

namespace photonstat::fitters {

struct FitReport {
  std::vector<std::pair<std::string, double>> params;  ///< name, value (fit order)
  std::vector<std::pair<std::string, double>> errors;  ///< name, standard error
  double residual_ss = 0.0;  ///< sum of squared weighted residuals
  int dof = 1;
  bool converged = false;
  int n_iter = 0;
  std::string note;

  double param(const std::string& name) const;
  double error(const std::string& name) const;
  bool has(const std::string& name) const;
};

/// Weighted fit of the damped-harmonic family with K harmonics; decay, omega
/// and a_k, phi_k all free. Stops when the relative change of the residual sum
/// drops below 1e-10 or after 500 iterations. BadInit when `init` is invalid.
FitReport fit_g2(const Correlogram& c, int k_harmonics, const corrmodel::HarmonicG2Params& init);

/// Starting point for fit_g2. With omega fixed the model is linear in the
/// harmonic cosine and sine coefficients, so these are solved exactly for
/// each decay rate on a log grid and for omega within +-2 % of `omega`; the
/// best combination wins. Amplitudes are shrunk if the result goes negative.
corrmodel::HarmonicG2Params initial_g2_guess(const Correlogram& c, int k_harmonics, double omega);

/// Rebuilds model parameters from a fit_g2 report.
corrmodel::HarmonicG2Params g2_params(const FitReport& r);

struct DeltaScan {
  double delta_min = 0.0;
  double delta_max = -1.0;  ///< < 0: twice the largest |tau| of the slice
  double step = -1.0;       ///< < 0: a twentieth of the fastest model period
  double tolerance = 1e-3;  ///< ns, polish accuracy
  /// Width of the delay acceptance the data average over (a delay row or the
  /// D1 gate). The models are then averaged over [delta - w/2, delta + w/2]
  /// with weight g2(delta'), since pairs arrive in proportion to it, and the
  /// fitted delta is the window centre. 0 means a sharp delay.
  double delta_window = 0.0;
};

/// g3(delta, tau) of the chosen kind, averaged over a delay window of the
/// given width (see DeltaScan::delta_window) when it is positive.
std::function<double(double, double)> g3_model(const corrmodel::HarmonicG2Params& g2, corrmodel::ModelKind kind,
                                               double delta_window = 0.0);

/// One-parameter fit of the delay delta with the g2 model frozen: grid scan
/// over [delta_min, delta_max], then a Brent polish around the best point.
/// A residual profile that varies by less than one unit over the whole scan
/// is reported as converged = false with note "flat residual profile".
FitReport fit_g3_delta(const Correlogram& c, const corrmodel::HarmonicG2Params& g2, corrmodel::ModelKind kind,
                       const DeltaScan& scan = {});

/// Same fit for an arbitrary model g3(delta, tau).
FitReport fit_delta_with(const Correlogram& c, const std::function<double(double, double)>& model,
                         double fastest_period_ns, const DeltaScan& scan = {});

enum class Preferred { Classical_Eq5, Quantum_Eq8 };

struct DiscriminationReport {
  FitReport fit_eq5;
  FitReport fit_eq8;
  double ratio = 1.0;  ///< residual_ss(eq5) / residual_ss(eq8)
  Preferred preferred = Preferred::Classical_Eq5;
};

/// Fits both models over delta; the first is labelled Eq5, the second Eq8.
DiscriminationReport compare_models(const Correlogram& c, const std::function<double(double, double)>& eq5,
                                    const std::function<double(double, double)>& eq8, double fastest_period_ns,
                                    const DeltaScan& scan = {});

DiscriminationReport discriminate(const Correlogram& c, const corrmodel::HarmonicG2Params& g2,
                                  const DeltaScan& scan = {});

/// T = a (j - j0)^(-p) by least squares on log T. With fit_j0 the offset is
/// free but kept below the smallest j; otherwise j0 is held at `j0`.
/// DomainError for fewer than three points or j <= j0.
FitReport fit_inverse_sqrt(const std::vector<std::pair<double, double>>& periods, bool fit_j0, double j0 = 0.0);

}  // namespace photonstat::fitters
