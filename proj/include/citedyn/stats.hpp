#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace citedyn::stats {

/// Pairwise (cascade) summation; error grows as O(log n) rather than O(n),
/// and the result does not depend on how a caller partitions the input.
double pairwise_sum(std::span<const double> values);

double mean(std::span<const double> values);

/// Unbiased sample variance (n - 1 denominator). Requires n >= 2.
double variance(std::span<const double> values);

struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double skewness = 0.0;  // g1, population-moment estimator
  double excess_kurtosis = 0.0;  // g2
};

Moments moments(std::span<const double> values);

/// Jarque-Bera statistic n/6 (S^2 + K^2/4) and its chi-squared(2) p-value.
struct JarqueBera {
  double statistic = 0.0;
  double p_value = 1.0;
};
JarqueBera jarque_bera(const Moments& m);

/// Ordinary least squares y = intercept + slope * x.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double intercept_se = 0.0;
  double slope_se = 0.0;
  double r2 = 0.0;
  double r2_adj = 0.0;
  std::size_t n = 0;
};

/// Throws InsufficientDataError for n < 3 and DegenerateError when x has no
/// spread.
LinearFit simple_ols(std::span<const double> x, std::span<const double> y);

/// Adjusted R^2 for a model with `n_params` fitted coefficients (intercept
/// included).
double adjusted_r2(double ss_res, double ss_tot, std::size_t n, std::size_t n_params);

/// Mid-distribution ranks: (#{v < v_k} + 0.5 #{v == v_k}) / n, in (0, 1).
std::vector<double> mid_ranks(std::span<const double> values);

double pearson_r(std::span<const double> x, std::span<const double> y);

/// Survival function of the F(d1, d2) distribution.
double f_sf(double f, double d1, double d2);

/// Two-sided p-value of Student's t with `df` degrees of freedom.
double t_two_sided_p(double t, double df);

struct GroupSummary {
  std::string label;
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
};

struct Anova {
  double f = 0.0;
  double df_between = 0.0;
  double df_within = 0.0;
  std::optional<double> p_value;  // empty when the within-group variance is zero
};

struct PairwiseTest {
  std::size_t first = 0;
  std::size_t second = 0;
  double t = 0.0;
  double df = 0.0;
  std::optional<double> p_raw;
  std::optional<double> p_adjusted;  // Bonferroni: min(1, p_raw * n_pairs)
  bool degenerate = false;
};

/// Classical one-way ANOVA; with `welch` set, Welch's heteroscedastic F.
Anova one_way_anova(const std::vector<std::vector<double>>& groups, bool welch = false);

/// All pairwise two-sample t tests with Bonferroni adjustment. The classical
/// variant uses the pooled within-group variance of all groups (the usual
/// post-hoc form); `welch` switches to unpooled Welch tests.
std::vector<PairwiseTest> bonferroni_pairwise(const std::vector<std::vector<double>>& groups,
                                              bool welch = false);

enum class Kernel { Epanechnikov, Gaussian };

struct DensityCurve {
  std::vector<double> x;
  std::vector<double> density;
};

/// Kernel density estimate sampled on `grid_points` equally spaced points
/// over [min - 3h, max + 3h].
DensityCurve kde(std::span<const double> values, double half_width,
                 Kernel kernel = Kernel::Epanechnikov, std::size_t grid_points = 512);

/// Serial twin of kde(), kept as the reference for the OpenMP kernel.
DensityCurve kde_serial(std::span<const double> values, double half_width,
                        Kernel kernel = Kernel::Epanechnikov, std::size_t grid_points = 512);

double trapezoid(std::span<const double> x, std::span<const double> y);

/// One-sample Kolmogorov-Smirnov distance between the empirical distribution
/// of `sample` and a continuous distribution function.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);

}  // namespace citedyn::stats
