#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace citedyn {

struct QuantilePoint {
  double y = 0.0;  // ln(c + 1)
  double q = 0.5;  // mid-distribution rank, strictly inside (0, 1)
  std::int64_t citations = 0;
  std::int64_t multiplicity = 1;
};

/// One point per distinct citation value, sorted by y.
struct QuantileSeries {
  std::vector<QuantilePoint> points;
  std::int64_t n_total = 0;
  bool zero_excluded = false;
};

struct LognormalFit {
  double b = 0.0;
  double m = 0.0;
  double b_se = 0.0;
  double m_se = 0.0;
  double r2_adj = 0.0;
  std::size_t n = 0;
};

struct PowerLawFit {
  double a = 0.0;
  std::optional<double> theta;
  double q_min = 0.0;
  double slope = 0.0;
  double r2_adj = 0.0;
  std::size_t n = 0;
};

/// Throws DataError on an empty (or all-zero with exclusion) sample.
QuantileSeries make_quantile_series(std::span<const std::int64_t> citations, bool exclude_zero);

/// OLS of y on Phi^-1(q), one observation per eprint (tied eprints share a
/// point, so each distinct value enters with its multiplicity).
LognormalFit fit_lognormal_quantile(const QuantileSeries& series);

/// OLS of ln(c/theta + 1) on -ln(1 - q) over points with q >= q_min.
PowerLawFit fit_power_law_quantile(const QuantileSeries& series, double q_min,
                                   std::optional<double> theta = std::nullopt);

/// Columns y,phi_inv_q,minus_log1mq, one row per distinct value.
void write_quantile_csv(std::ostream& out, const QuantileSeries& series);

}  // namespace citedyn
