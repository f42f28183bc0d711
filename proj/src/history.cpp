#include "citedyn/history.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "citedyn/csv.hpp"
#include "citedyn/errors.hpp"
#include "citedyn/levmar.hpp"
#include "citedyn/normal.hpp"

namespace citedyn {
namespace {

constexpr std::size_t kParams = 5;
constexpr std::array<double, 4> kStartMu = {0.5, 1.0, 1.5, 2.0};
constexpr std::array<double, 3> kStartSigma = {0.5, 0.8, 1.2};
constexpr std::array<double, 3> kStartLambda = {0.5, 2.0, 20.0};

double lognormal_pdf(double x, double mu, double sigma) {
  if (x <= 0.0) return 0.0;
  const double z = (std::log(x) - mu) / sigma;
  return std::exp(-0.5 * z * z) / (x * sigma * std::sqrt(2.0 * std::numbers::pi));
}

// ln cosh x without overflow.
double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double sech2(double x) {
  const double c = std::cosh(x);
  return std::isfinite(c) ? 1.0 / (c * c) : 0.0;
}

HistoryParams from_theta(const Eigen::VectorXd& th) {
  HistoryParams p;
  p.A = std::exp(th[0]);
  p.mu = th[1];
  p.sigma = std::exp(th[2]);
  p.B = std::exp(th[3]);
  p.lambda = std::exp(th[4]);
  return p;
}

struct Problem {
  std::vector<double> t;
  std::vector<double> u;
  std::vector<double> w;
};

void residuals(const Problem& pr, const Eigen::VectorXd& th, Eigen::VectorXd& r) {
  const HistoryParams p = from_theta(th);
  r.resize(static_cast<Eigen::Index>(pr.t.size()));
  for (std::size_t i = 0; i < pr.t.size(); ++i) {
    const double model =
        p.A * lognormal_pdf(pr.t[i] + 1.0, p.mu, p.sigma) + p.B * std::tanh(p.lambda * pr.t[i]);
    r[static_cast<Eigen::Index>(i)] = pr.w[i] * (model - pr.u[i]);
  }
}

void jacobian(const Problem& pr, const Eigen::VectorXd& th, Eigen::MatrixXd& J) {
  const HistoryParams p = from_theta(th);
  J.resize(static_cast<Eigen::Index>(pr.t.size()), kParams);
  const double s2 = p.sigma * p.sigma;
  for (std::size_t i = 0; i < pr.t.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const double t = pr.t[i];
    const double af = p.A * lognormal_pdf(t + 1.0, p.mu, p.sigma);
    const double L = std::log(t + 1.0) - p.mu;
    const double lt = p.lambda * t;
    J(row, 0) = pr.w[i] * af;
    J(row, 1) = pr.w[i] * af * L / s2;
    J(row, 2) = pr.w[i] * af * (L * L / s2 - 1.0);
    J(row, 3) = pr.w[i] * p.B * std::tanh(lt);
    J(row, 4) = pr.w[i] * p.B * lt * sech2(lt);
  }
}

double weighted_ss_tot(const Problem& pr) {
  double sw = 0.0, m = 0.0;
  for (std::size_t i = 0; i < pr.u.size(); ++i) {
    sw += pr.w[i] * pr.w[i];
    m += pr.w[i] * pr.w[i] * pr.u[i];
  }
  m /= sw;
  double ss = 0.0;
  for (std::size_t i = 0; i < pr.u.size(); ++i) {
    ss += pr.w[i] * pr.w[i] * (pr.u[i] - m) * (pr.u[i] - m);
  }
  return ss;
}

// Standard errors from s^2 (J^T J)^-1 in theta space, mapped to the natural
// parameters by the delta method. With lambda_fixed the lambda column is
// left out.
StandardErrors standard_errors(const Eigen::MatrixXd& J, double ss_res, std::size_t n,
                               const HistoryParams& p, bool lambda_fixed) {
  const Eigen::Index k = lambda_fixed ? 4 : 5;
  StandardErrors se;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  se.lambda = nan;
  if (static_cast<Eigen::Index>(n) <= k) {
    se.A = se.mu = se.sigma = se.B = nan;
    return se;
  }
  const Eigen::MatrixXd Jk = J.leftCols(k);
  const Eigen::MatrixXd info = Jk.transpose() * Jk;
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(info);
  const Eigen::MatrixXd cov =
      cod.pseudoInverse() * (ss_res / static_cast<double>(static_cast<Eigen::Index>(n) - k));
  auto sd = [&](Eigen::Index j) { return std::sqrt(std::max(0.0, cov(j, j))); };
  se.A = p.A * sd(0);
  se.mu = sd(1);
  se.sigma = p.sigma * sd(2);
  se.B = p.B * sd(3);
  if (!lambda_fixed) se.lambda = p.lambda * sd(4);
  return se;
}

}  // namespace

double lognormal_component(const HistoryParams& p, double t) {
  if (t < 0.0) throw DomainError("eval_history: t must be >= 0");
  return p.A * lognormal_pdf(t + 1.0, p.mu, p.sigma);
}

double sigmoid_component(const HistoryParams& p, double t) {
  if (t < 0.0) throw DomainError("eval_history: t must be >= 0");
  if (p.lambda_capped) return t > 0.0 ? p.B : 0.0;
  return p.B * std::tanh(p.lambda * t);
}

double eval_history(const HistoryParams& p, double t) {
  return lognormal_component(p, t) + sigmoid_component(p, t);
}

HistoryFit fit_history_points(std::span<const double> t, std::span<const double> u,
                              std::span<const double> weights, const FitOptions& options) {
  if (t.size() != u.size() || (!weights.empty() && weights.size() != t.size())) {
    throw DomainError("fit_history: mismatched input lengths");
  }
  if (t.size() < kParams + 1) {
    throw InsufficientDataError("fit_history: need >= 6 ages, got " + std::to_string(t.size()));
  }
  Problem pr;
  pr.t.assign(t.begin(), t.end());
  pr.u.assign(u.begin(), u.end());
  pr.w = weights.empty() ? std::vector<double>(t.size(), 1.0)
                         : std::vector<double>(weights.begin(), weights.end());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] >= 0.0) || !std::isfinite(u[i]) || u[i] < 0.0 || !(pr.w[i] > 0.0)) {
      throw DataError("fit_history: ages, rates and weights must be finite and non-negative");
    }
  }
  const double peak = *std::max_element(pr.u.begin(), pr.u.end());
  if (!(peak > 0.0)) throw DegenerateError("fit_history: all mean citations are zero");

  // Tail mean over the last third of the ages seeds B.
  std::vector<std::size_t> order(t.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return pr.t[a] < pr.t[b]; });
  const std::size_t tail = std::max<std::size_t>(1, order.size() / 3);
  double b0 = 0.0;
  for (std::size_t k = order.size() - tail; k < order.size(); ++k) b0 += pr.u[order[k]];
  b0 = std::max(b0 / static_cast<double>(tail), 1e-3 * peak);

  double sum_sq = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) sum_sq += pr.w[i] * pr.w[i] * pr.u[i] * pr.u[i];

  LevMarOptions lm;
  lm.max_iterations = options.max_iterations;
  lm.gradient_tol = options.gradient_tol;
  lm.cost_floor = 1e-24 * sum_sq;
  lm.lower = Eigen::VectorXd(kParams);
  lm.upper = Eigen::VectorXd(kParams);
  lm.lower << -40.0, -10.0, std::log(0.01), -40.0, std::log(1e-4);
  lm.upper << 40.0, 10.0, std::log(20.0), 40.0, std::log(kLambdaBound);

  const ResidualFn rf = [&pr](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    residuals(pr, x, r);
  };
  const JacobianFn jf = [&pr](const Eigen::VectorXd& x, Eigen::MatrixXd& J) {
    jacobian(pr, x, J);
  };

  std::optional<LevMarResult> best;
  int tried = 0;
  for (double mu0 : kStartMu) {
    for (double sigma0 : kStartSigma) {
      double fmax = 0.0;
      for (double ti : pr.t) fmax = std::max(fmax, lognormal_pdf(ti + 1.0, mu0, sigma0));
      const double excess = peak - b0 > 0.0 ? peak - b0 : 0.5 * peak;
      const double a0 = excess / std::max(fmax, 1e-12);
      for (double lambda0 : kStartLambda) {
        Eigen::VectorXd x0(kParams);
        x0 << std::log(a0), mu0, std::log(sigma0), std::log(b0), std::log(lambda0);
        LevMarResult res = levenberg_marquardt(rf, jf, x0, lm);
        ++tried;
        if (!std::isfinite(res.cost)) continue;
        const bool better = !best || (res.converged && !best->converged) ||
                            (res.converged == best->converged && res.cost < best->cost);
        if (better) best = std::move(res);
      }
    }
  }
  if (!best) throw ConvergenceError("fit_history: every start diverged");

  HistoryFit fit;
  fit.params = from_theta(best->x);
  fit.params.lambda_capped = fit.params.lambda > kLambdaCapThreshold;
  fit.converged = best->converged;
  fit.starts_tried = tried;
  fit.ages = pr.t;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double model = fit.params.A * lognormal_pdf(pr.t[i] + 1.0, fit.params.mu,
                                                      fit.params.sigma) +
                         fit.params.B * std::tanh(fit.params.lambda * pr.t[i]);
    fit.residuals.push_back(pr.u[i] - model);
    ss_res += pr.w[i] * pr.w[i] * fit.residuals.back() * fit.residuals.back();
  }
  const double ss_tot = weighted_ss_tot(pr);
  const auto n = static_cast<double>(t.size());
  fit.r2_adj = ss_tot > 0.0 ? 1.0 - (ss_res / (n - kParams)) / (ss_tot / (n - 1.0)) : 1.0;
  fit.se = standard_errors(best->jacobian, ss_res, t.size(), fit.params,
                           fit.params.lambda_capped);
  return fit;
}

HistoryFit fit_history(const AgePanel& panel, const FitOptions& options) {
  std::vector<double> t, u, w;
  for (const auto& e : panel.entries) {
    t.push_back(e.age);
    u.push_back(e.mean_citations);
    if (options.weight_by_population) w.push_back(std::sqrt(static_cast<double>(e.n_eprints)));
  }
  HistoryFit fit = fit_history_points(t, u, w, options);
  fit.discipline = panel.discipline;
  fit.dataset_year = panel.dataset_year;
  fit.percentile_cap = panel.percentile_cap;
  return fit;
}

PeakLocation find_peak(const HistoryParams& p, double t_max) {
  constexpr int kGrid = 5000;
  const double h = t_max / kGrid;
  PeakLocation best{0.0, eval_history(p, 0.0)};
  int best_k = 0;
  for (int k = 1; k <= kGrid; ++k) {
    const double v = eval_history(p, k * h);
    if (v > best.u) {
      best = {k * h, v};
      best_k = k;
    }
  }
  double lo = std::max(0, best_k - 1) * h;
  double hi = std::min(kGrid, best_k + 1) * h;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = eval_history(p, x1);
  double f2 = eval_history(p, x2);
  for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + hi); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = eval_history(p, x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = eval_history(p, x1);
    }
  }
  const double tm = 0.5 * (lo + hi);
  const double um = eval_history(p, tm);
  if (um > best.u) best = {tm, um};
  return best;
}

DerivedMetrics derive_metrics(const HistoryParams& p) {
  DerivedMetrics m;
  const double s2 = p.sigma * p.sigma;
  m.delta1 = std::exp(p.mu - s2);
  m.delta2 = std::exp(p.mu) * -std::expm1(-s2);
  m.s_rate = m.delta1 / m.delta2;
  const PeakLocation peak = find_peak(p);
  m.u_peak = peak.u;
  m.t_peak = peak.t;
  m.r_rate = p.B / m.u_peak;
  m.i_rate = 1.0 / m.r_rate;
  m.ln_mean = std::exp(p.mu + 0.5 * s2);
  m.ln_median = std::exp(p.mu);
  m.ln_mode = m.delta1;
  m.ln_variance = std::expm1(s2) * std::exp(2.0 * p.mu + s2);
  return m;
}

DerivedMetrics derive_metrics(const HistoryFit& fit) {
  if (!fit.converged) throw DataError("derive_metrics: fit did not converge");
  return derive_metrics(fit.params);
}

CumulativeSplit cumulative_split(const HistoryParams& p, double T) {
  if (!(T >= 1.0)) throw DomainError("cumulative_split: T must be >= 1");
  CumulativeSplit s;
  s.T = T;
  s.F = p.A * normal_cdf((std::log(T) - p.mu) / p.sigma);
  s.G = p.lambda_capped ? p.B * (T - 1.0) : (p.B / p.lambda) * log_cosh(p.lambda * (T - 1.0));
  s.H = s.F + s.G;
  s.rho = s.F / s.H;
  return s;
}

std::vector<TrendPoint> trend_metrics(std::span<const AgePanel> panels,
                                      const FitOptions& options) {
  if (panels.empty()) throw InsufficientDataError("trend_metrics: no panels");
  std::vector<TrendPoint> out;
  for (const auto& panel : panels) {
    const HistoryFit fit = fit_history(panel, options);
    const DerivedMetrics m = derive_metrics(fit.params);
    TrendPoint tp;
    tp.dataset_year = panel.dataset_year;
    tp.converged = fit.converged;
    tp.params = fit.params;
    tp.s_rate = m.s_rate;
    tp.r_rate = m.r_rate;
    tp.i_rate = m.i_rate;
    tp.delta1 = m.delta1;
    tp.delta2 = m.delta2;
    out.push_back(tp);
  }
  return out;
}

void write_curve_csv(std::ostream& out, const HistoryParams& p, double t_max, double step) {
  if (!(step > 0.0) || !(t_max >= 0.0)) throw DomainError("curve: need step > 0, t_max >= 0");
  out << "t,u_hat,f_component,g_component\n";
  const auto n = static_cast<long>(std::floor(t_max / step + 1e-9));
  for (long k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * step;
    const double f = lognormal_component(p, t);
    const double g = sigmoid_component(p, t);
    out << csv::format_double(t) << ',' << csv::format_double(f + g) << ','
        << csv::format_double(f) << ',' << csv::format_double(g) << '\n';
  }
}

}  // namespace citedyn
