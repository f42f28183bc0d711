#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "citedyn/corpus.hpp"

namespace citedyn {

/// Values of lambda above this are displayed as ">> 1" and treated as a step.
inline constexpr double kLambdaCapThreshold = 10.0;
/// Internal upper bound on lambda during fitting.
inline constexpr double kLambdaBound = 50.0;

struct HistoryParams {
  double A = 1.0;
  double mu = 1.0;
  double sigma = 1.0;
  double B = 0.1;
  double lambda = 1.0;
  bool lambda_capped = false;
};

/// u(t) = A f(t+1; mu, sigma) + B g(t); g = tanh(lambda t), or the unit step
/// (0 at t = 0, 1 after) when lambda is capped.
double eval_history(const HistoryParams& p, double t);
double lognormal_component(const HistoryParams& p, double t);
double sigmoid_component(const HistoryParams& p, double t);

struct FitOptions {
  /// Weight each age's residual by sqrt(n_i).
  bool weight_by_population = false;
  int max_iterations = 400;
  double gradient_tol = 1e-8;
};

struct StandardErrors {
  double A = 0.0, mu = 0.0, sigma = 0.0, B = 0.0, lambda = 0.0;
};

struct HistoryFit {
  HistoryParams params;
  StandardErrors se;
  double r2_adj = 0.0;
  std::vector<double> ages;
  std::vector<double> residuals;  // u_i - u_hat(t_i)
  bool converged = false;
  int starts_tried = 0;
  Discipline discipline;
  int dataset_year = 0;
  double percentile_cap = 1.0;
};

/// Multi-start Levenberg-Marquardt on (ln A, mu, ln sigma, ln B, ln lambda).
HistoryFit fit_history(const AgePanel& panel, const FitOptions& options = {});

/// Lower-level entry taking raw (t, u) pairs; weights may be empty.
HistoryFit fit_history_points(std::span<const double> t, std::span<const double> u,
                              std::span<const double> weights, const FitOptions& options = {});

struct DerivedMetrics {
  double u_peak = 0.0;
  double t_peak = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double s_rate = 0.0;
  double r_rate = 0.0;
  double i_rate = 0.0;
  // Lognormal component in shifted time t + 1.
  double ln_mean = 0.0;
  double ln_median = 0.0;
  double ln_mode = 0.0;
  double ln_variance = 0.0;
};

/// Throws DataError for a non-converged fit.
DerivedMetrics derive_metrics(const HistoryFit& fit);
DerivedMetrics derive_metrics(const HistoryParams& params);

struct PeakLocation {
  double t = 0.0;
  double u = 0.0;
};

/// Maximum of u on [0, t_max]: grid scan then golden-section refinement.
PeakLocation find_peak(const HistoryParams& p, double t_max = 50.0);

struct CumulativeSplit {
  double T = 1.0;
  double F = 0.0;
  double G = 0.0;
  double H = 0.0;
  double rho = 1.0;
};

/// Throws DomainError for T < 1.
CumulativeSplit cumulative_split(const HistoryParams& p, double T);

struct TrendPoint {
  int dataset_year = 0;
  bool converged = false;
  HistoryParams params;
  double s_rate = 0.0;
  double r_rate = 0.0;
  double i_rate = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
};

std::vector<TrendPoint> trend_metrics(std::span<const AgePanel> panels,
                                      const FitOptions& options = {});

/// Columns t,u_hat,f_component,g_component sampled every `step` years.
void write_curve_csv(std::ostream& out, const HistoryParams& p, double t_max, double step);

}  // namespace citedyn
