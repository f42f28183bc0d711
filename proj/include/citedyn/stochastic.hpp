#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "citedyn/history.hpp"
#include "citedyn/kernels.hpp"
#include "citedyn/stats.hpp"

namespace citedyn {

struct VolatilityFit {
  double s1 = 1.0;
  double s2 = 0.0;
  double s1_se = 0.0;
  double s2_se = 0.0;
  double r2_adj = 0.0;
  std::size_t n = 0;
};

/// Least squares of m = sqrt(s2 ln(t/s1 + 1)). For fixed s1 the optimal
/// sqrt(s2) is closed-form, so the search is one-dimensional in ln s1 over
/// [1e-6, 1e3]; an optimum on that boundary raises ConvergenceError.
VolatilityFit fit_volatility(std::span<const double> t, std::span<const double> m_hat);

/// beta*(t) = sqrt(s2 / (t + s1)).
double beta_star(double t, const VolatilityFit& vol);

/// Integral of beta*^2 over [a, b]: s2 ln((b + s1) / (a + s1)).
double integrated_variance(double a, double b, const VolatilityFit& vol);

enum class CountingMode { IntegralFloor, YearlyFloorSum };

struct SdeConfig {
  double dt = 0.01;
  double horizon = 10.0;
  std::size_t n_paths = 1000;
  std::uint64_t seed = 0;
  CountingMode counting_mode = CountingMode::IntegralFloor;
  kernels::Scheme scheme = kernels::Scheme::ExactLog;
  bool parallel = true;
};

struct PathEnsemble {
  std::vector<double> grid;
  std::size_t n_paths = 0;
  /// n_paths x grid.size(), row-major.
  std::vector<double> x;
  HistoryParams params;
  VolatilityFit vol;
  SdeConfig config;

  double at(std::size_t path, std::size_t i) const { return x[path * grid.size() + i]; }
  /// Index of the grid point equal to t; throws DomainError if none.
  std::size_t index_of(double t) const;
  std::vector<double> column(std::size_t i) const;
};

/// Throws DomainError for an invalid config or u(t) <= 0 on the grid.
PathEnsemble simulate_ensemble(const HistoryParams& params, const VolatilityFit& vol,
                               const SdeConfig& config);

/// ln w(t) = s2 ln(t/s1 + 1) / 2.
double log_w(double t, const VolatilityFit& vol);

/// Lognormal marginal of X(t): median u/w, log-variance 2 ln w.
double closed_form_density(double x, double t, const HistoryParams& params,
                           const VolatilityFit& vol);
double closed_form_cdf(double x, double t, const HistoryParams& params, const VolatilityFit& vol);

/// c(T) per path. IntegralFloor: floor of the trapezoid integral of X over
/// [0, T]. YearlyFloorSum: sum of floor(X(i)) for integer i in [0, T).
std::vector<std::int64_t> count_citations(const PathEnsemble& ensemble, CountingMode mode,
                                          double T);

/// Columns path_id,t,x for every `stride`-th grid point.
void write_ensemble_csv(std::ostream& out, const PathEnsemble& e, std::size_t stride = 1);
/// Columns t,mean,var,q05,q50,q95 for every `stride`-th grid point.
void write_ensemble_summary_csv(std::ostream& out, const PathEnsemble& e, std::size_t stride = 1);

struct TimingSimConfig {
  double t0 = 1.0;
  int n_events = 100;
  double epsilon_bound = 0.1;
  std::size_t n_samples = 10000;
  std::uint64_t seed = 0;
};

struct TimingReport {
  stats::Moments log_moments;
  stats::JarqueBera jarque_bera;
  double expected_log_mean = 0.0;
  std::vector<double> log_t;
};

/// t_n = t0 prod (1 + eps_j), eps_j uniform on [-bound, bound].
TimingReport simulate_timing_clt(const TimingSimConfig& config);

/// E[ln(1 + eps)] for eps uniform on [-b, b].
double expected_log_factor(double b);

}  // namespace citedyn
