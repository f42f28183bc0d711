#include "citedyn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>

#include "citedyn/errors.hpp"

namespace citedyn::stats {
namespace {

constexpr std::size_t kPairwiseBlock = 32;

double kernel_value(Kernel kernel, double u) {
  if (kernel == Kernel::Epanechnikov) {
    return std::abs(u) < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
  }
  return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
}

struct KdeGrid {
  double lo = 0.0;
  double step = 0.0;
};

KdeGrid make_grid(std::span<const double> values, double h, std::size_t points) {
  if (values.size() < 2) throw InsufficientDataError("kde: need at least 2 values");
  if (!(h > 0.0)) throw DomainError("kde: half-width must be positive");
  if (points < 2) throw DomainError("kde: need at least 2 grid points");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn - 3.0 * h;
  const double hi = *mx + 3.0 * h;
  return {lo, (hi - lo) / static_cast<double>(points - 1)};
}

double density_at(std::span<const double> values, double h, Kernel kernel, double x) {
  double acc = 0.0;
  for (double v : values) acc += kernel_value(kernel, (x - v) / h);
  return acc / (static_cast<double>(values.size()) * h);
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= kPairwiseBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double mean(std::span<const double> values) {
  if (values.empty()) throw InsufficientDataError("mean of empty sample");
  return pairwise_sum(values) / static_cast<double>(values.size());
}

double variance(std::span<const double> values) {
  if (values.size() < 2) throw InsufficientDataError("variance needs n >= 2");
  const double m = mean(values);
  std::vector<double> sq(values.size());
  std::transform(values.begin(), values.end(), sq.begin(),
                 [m](double v) { return (v - m) * (v - m); });
  return pairwise_sum(sq) / static_cast<double>(values.size() - 1);
}

Moments moments(std::span<const double> values) {
  if (values.size() < 2) throw InsufficientDataError("moments need n >= 2");
  Moments out;
  out.n = values.size();
  out.mean = mean(values);
  const std::size_t n = values.size();
  std::vector<double> d2(n), d3(n), d4(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = values[i] - out.mean;
    d2[i] = d * d;
    d3[i] = d2[i] * d;
    d4[i] = d2[i] * d2[i];
  }
  const double nn = static_cast<double>(n);
  const double m2 = pairwise_sum(d2) / nn;
  const double m3 = pairwise_sum(d3) / nn;
  const double m4 = pairwise_sum(d4) / nn;
  out.variance = m2 * nn / (nn - 1.0);
  if (m2 > 0.0) {
    out.skewness = m3 / std::pow(m2, 1.5);
    out.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return out;
}

JarqueBera jarque_bera(const Moments& m) {
  JarqueBera jb;
  jb.statistic = static_cast<double>(m.n) / 6.0 *
                 (m.skewness * m.skewness + 0.25 * m.excess_kurtosis * m.excess_kurtosis);
  jb.p_value = std::exp(-0.5 * jb.statistic);  // chi-squared with 2 dof
  return jb;
}

double adjusted_r2(double ss_res, double ss_tot, std::size_t n, std::size_t n_params) {
  if (n <= n_params || ss_tot <= 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  const double nn = static_cast<double>(n);
  const double k = static_cast<double>(n_params);
  return 1.0 - (ss_res / (nn - k)) / (ss_tot / (nn - 1.0));
}

LinearFit simple_ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("simple_ols: x and y differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw InsufficientDataError("simple_ols: need at least 3 observations");
  const double mx = mean(x);
  const double my = mean(y);
  std::vector<double> sxx(n), sxy(n), syy(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx[i] = dx * dx;
    sxy[i] = dx * dy;
    syy[i] = dy * dy;
  }
  const double Sxx = pairwise_sum(sxx);
  const double Sxy = pairwise_sum(sxy);
  const double Syy = pairwise_sum(syy);
  if (!(Sxx > 0.0)) throw DegenerateError("simple_ols: regressor has zero variance");

  LinearFit fit;
  fit.n = n;
  fit.slope = Sxy / Sxx;
  fit.intercept = my - fit.slope * mx;
  std::vector<double> res2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    res2[i] = r * r;
  }
  const double ss_res = pairwise_sum(res2);
  const double s2 = ss_res / static_cast<double>(n - 2);
  fit.slope_se = std::sqrt(s2 / Sxx);
  fit.intercept_se = std::sqrt(s2 * (1.0 / static_cast<double>(n) + mx * mx / Sxx));
  fit.r2 = Syy > 0.0 ? 1.0 - ss_res / Syy : 1.0;
  fit.r2_adj = adjusted_r2(ss_res, Syy, n, 2);
  return fit;
}

std::vector<double> mid_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> q(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + 0.5 * static_cast<double>(j - i)) /
                        static_cast<double>(n);
    for (std::size_t k = i; k < j; ++k) q[order[k]] = rank;
    i = j;
  }
  return q;
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("pearson_r: vectors differ in length");
  if (x.size() < 2) throw InsufficientDataError("pearson_r: need n >= 2");
  const double mx = mean(x);
  const double my = mean(y);
  std::vector<double> sxy(x.size()), sxx(x.size()), syy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy[i] = (x[i] - mx) * (y[i] - my);
    sxx[i] = (x[i] - mx) * (x[i] - mx);
    syy[i] = (y[i] - my) * (y[i] - my);
  }
  const double den = std::sqrt(pairwise_sum(sxx) * pairwise_sum(syy));
  if (!(den > 0.0)) throw DegenerateError("pearson_r: zero variance");
  return pairwise_sum(sxy) / den;
}

double f_sf(double f, double d1, double d2) {
  if (!(f > 0.0)) return 1.0;
  if (std::isinf(f)) return 0.0;
  return boost::math::ibeta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f));
}

double t_two_sided_p(double t, double df) {
  if (std::isinf(t)) return 0.0;
  return boost::math::ibeta(0.5 * df, 0.5, df / (df + t * t));
}

Anova one_way_anova(const std::vector<std::vector<double>>& groups, bool welch) {
  if (groups.size() < 2) throw InsufficientDataError("ANOVA needs at least 2 groups");
  for (const auto& g : groups) {
    if (g.size() < 2) throw InsufficientDataError("ANOVA needs at least 2 values per group");
  }
  const double k = static_cast<double>(groups.size());
  std::vector<double> means, vars, ns;
  for (const auto& g : groups) {
    means.push_back(mean(g));
    vars.push_back(variance(g));
    ns.push_back(static_cast<double>(g.size()));
  }
  Anova out;
  if (!welch) {
    const double n_total = std::accumulate(ns.begin(), ns.end(), 0.0);
    std::vector<double> weighted(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) weighted[i] = ns[i] * means[i];
    const double grand = pairwise_sum(weighted) / n_total;
    double ss_between = 0.0, ss_within = 0.0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      ss_between += ns[i] * (means[i] - grand) * (means[i] - grand);
      ss_within += (ns[i] - 1.0) * vars[i];
    }
    out.df_between = k - 1.0;
    out.df_within = n_total - k;
    if (ss_within > 0.0) {
      out.f = (ss_between / out.df_between) / (ss_within / out.df_within);
      out.p_value = f_sf(out.f, out.df_between, out.df_within);
    } else {
      out.f = ss_between > 0.0 ? INFINITY : 0.0;
    }
    return out;
  }
  // Welch (1951).
  std::vector<double> w(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (!(vars[i] > 0.0)) {
      out.df_between = k - 1.0;
      return out;
    }
    w[i] = ns[i] / vars[i];
  }
  const double sw = std::accumulate(w.begin(), w.end(), 0.0);
  double mw = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) mw += w[i] * means[i];
  mw /= sw;
  double a = 0.0, lam = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    a += w[i] * (means[i] - mw) * (means[i] - mw);
    const double r = 1.0 - w[i] / sw;
    lam += r * r / (ns[i] - 1.0);
  }
  a /= (k - 1.0);
  const double b = 1.0 + 2.0 * (k - 2.0) / (k * k - 1.0) * lam;
  out.f = a / b;
  out.df_between = k - 1.0;
  out.df_within = (k * k - 1.0) / (3.0 * lam);
  out.p_value = f_sf(out.f, out.df_between, out.df_within);
  return out;
}

std::vector<PairwiseTest> bonferroni_pairwise(const std::vector<std::vector<double>>& groups,
                                              bool welch) {
  const std::size_t k = groups.size();
  std::vector<double> means, vars, ns;
  double ss_within = 0.0, n_total = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw InsufficientDataError("pairwise tests need n >= 2 per group");
    means.push_back(mean(g));
    vars.push_back(variance(g));
    ns.push_back(static_cast<double>(g.size()));
    ss_within += (ns.back() - 1.0) * vars.back();
    n_total += ns.back();
  }
  const double pooled = ss_within / (n_total - static_cast<double>(k));
  const double n_pairs = static_cast<double>(k * (k - 1) / 2);

  std::vector<PairwiseTest> out;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      PairwiseTest t;
      t.first = i;
      t.second = j;
      double se2 = 0.0;
      if (welch) {
        const double a = vars[i] / ns[i];
        const double b = vars[j] / ns[j];
        se2 = a + b;
        t.df = se2 * se2 / (a * a / (ns[i] - 1.0) + b * b / (ns[j] - 1.0));
      } else {
        se2 = pooled * (1.0 / ns[i] + 1.0 / ns[j]);
        t.df = n_total - static_cast<double>(k);
      }
      if (!(se2 > 0.0) || !std::isfinite(t.df)) {
        t.degenerate = true;
      } else {
        t.t = (means[i] - means[j]) / std::sqrt(se2);
        t.p_raw = t_two_sided_p(t.t, t.df);
        t.p_adjusted = std::min(1.0, *t.p_raw * n_pairs);
      }
      out.push_back(t);
    }
  }
  return out;
}

DensityCurve kde_serial(std::span<const double> values, double half_width, Kernel kernel,
                        std::size_t grid_points) {
  const KdeGrid g = make_grid(values, half_width, grid_points);
  DensityCurve c;
  c.x.resize(grid_points);
  c.density.resize(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    c.x[i] = g.lo + g.step * static_cast<double>(i);
    c.density[i] = density_at(values, half_width, kernel, c.x[i]);
  }
  return c;
}

DensityCurve kde(std::span<const double> values, double half_width, Kernel kernel,
                 std::size_t grid_points) {
  const KdeGrid g = make_grid(values, half_width, grid_points);
  DensityCurve c;
  c.x.resize(grid_points);
  c.density.resize(grid_points);
  const auto n = static_cast<std::ptrdiff_t>(grid_points);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    c.x[idx] = g.lo + g.step * static_cast<double>(i);
    c.density[idx] = density_at(values, half_width, kernel, c.x[idx]);
  }
  return c;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("trapezoid: x and y differ in length");
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw InsufficientDataError("ks_statistic: empty sample");
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace citedyn::stats
