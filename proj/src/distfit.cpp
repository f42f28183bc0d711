#include "citedyn/distfit.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "citedyn/csv.hpp"
#include "citedyn/errors.hpp"
#include "citedyn/normal.hpp"
#include "citedyn/stats.hpp"

namespace citedyn {
namespace {

// Weighted OLS y = intercept + slope * x with integer frequency weights, so a
// series of distinct values reproduces the per-eprint regression exactly.
struct WeightedLine {
  double intercept = 0.0;
  double slope = 0.0;
  double intercept_se = 0.0;
  double slope_se = 0.0;
  double r2_adj = 0.0;
  std::size_t n = 0;
};

WeightedLine weighted_ols(std::span<const double> x, std::span<const double> y,
                          std::span<const double> w) {
  double sw = 0.0;
  for (double v : w) sw += v;
  if (x.size() < 2 || sw < 3.0) throw InsufficientDataError("regression needs >= 3 observations");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += w[i] * x[i];
    my += w[i] * y[i];
  }
  mx /= sw;
  my /= sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += w[i] * dx * dx;
    sxy += w[i] * dx * dy;
    syy += w[i] * dy * dy;
  }
  if (!(sxx > 0.0)) throw DegenerateError("regressor has zero variance");
  WeightedLine out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - out.intercept - out.slope * x[i];
    ss_res += w[i] * r * r;
  }
  out.n = static_cast<std::size_t>(std::llround(sw));
  const double s2 = ss_res / (sw - 2.0);
  out.slope_se = std::sqrt(s2 / sxx);
  out.intercept_se = std::sqrt(s2 * (1.0 / sw + mx * mx / sxx));
  out.r2_adj = syy > 0.0 ? stats::adjusted_r2(ss_res, syy, out.n, 2) : 1.0;
  return out;
}

}  // namespace

QuantileSeries make_quantile_series(std::span<const std::int64_t> citations, bool exclude_zero) {
  std::map<std::int64_t, std::int64_t> counts;
  for (auto c : citations) {
    if (c < 0) throw DataError("negative citation count");
    if (exclude_zero && c == 0) continue;
    ++counts[c];
  }
  if (counts.empty()) throw DataError("quantile series of an empty sample");
  QuantileSeries s;
  s.zero_excluded = exclude_zero;
  for (const auto& [c, k] : counts) s.n_total += k;
  const auto n = static_cast<double>(s.n_total);
  std::int64_t below = 0;
  for (const auto& [c, k] : counts) {
    QuantilePoint p;
    p.citations = c;
    p.multiplicity = k;
    p.y = std::log1p(static_cast<double>(c));
    p.q = (static_cast<double>(below) + 0.5 * static_cast<double>(k)) / n;
    s.points.push_back(p);
    below += k;
  }
  return s;
}

LognormalFit fit_lognormal_quantile(const QuantileSeries& series) {
  if (series.points.size() < 3) {
    throw InsufficientDataError("lognormal fit needs >= 3 distinct values");
  }
  std::vector<double> x, y, w;
  for (const auto& p : series.points) {
    x.push_back(normal_quantile(p.q));
    y.push_back(p.y);
    w.push_back(static_cast<double>(p.multiplicity));
  }
  const WeightedLine l = weighted_ols(x, y, w);
  return {l.intercept, l.slope, l.intercept_se, l.slope_se, l.r2_adj, l.n};
}

PowerLawFit fit_power_law_quantile(const QuantileSeries& series, double q_min,
                                   std::optional<double> theta) {
  if (theta && !(*theta > 0.0)) throw DomainError("theta must be positive");
  if (!(q_min >= 0.0 && q_min < 1.0)) throw DomainError("q_min must lie in [0, 1)");
  const double th = theta.value_or(1.0);
  // y = ln(c + 1) already is the theta = 1 transform.
  std::vector<double> x, y, w;
  for (const auto& p : series.points) {
    if (p.q < q_min) continue;
    x.push_back(-std::log1p(-p.q));
    y.push_back(theta ? std::log1p(std::expm1(p.y) / th) : p.y);
    w.push_back(static_cast<double>(p.multiplicity));
  }
  if (x.size() < 3) throw InsufficientDataError("power-law fit needs >= 3 points above q_min");
  const WeightedLine l = weighted_ols(x, y, w);
  if (!(l.slope > 0.0)) throw DegenerateError("non-positive slope: no power-law tail");
  PowerLawFit out;
  out.slope = l.slope;
  out.a = 1.0 + 1.0 / l.slope;
  out.theta = theta;
  out.q_min = q_min;
  out.r2_adj = l.r2_adj;
  out.n = l.n;
  return out;
}

void write_quantile_csv(std::ostream& out, const QuantileSeries& series) {
  out << "y,phi_inv_q,minus_log1mq\n";
  for (const auto& p : series.points) {
    out << csv::format_double(p.y) << ',' << csv::format_double(normal_quantile(p.q)) << ','
        << csv::format_double(-std::log1p(-p.q)) << '\n';
  }
}

}  // namespace citedyn
