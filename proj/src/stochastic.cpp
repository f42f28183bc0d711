#include "citedyn/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "citedyn/csv.hpp"
#include "citedyn/errors.hpp"
#include "citedyn/levmar.hpp"
#include "citedyn/normal.hpp"
#include "citedyn/rng.hpp"

namespace citedyn {
namespace {

constexpr double kLogS1Low = -13.815510557964274;  // ln 1e-6
constexpr double kLogS1High = 6.907755278982137;   // ln 1e3

struct Profile {
  double cost = 0.0;
  double root_s2 = 0.0;
};

Profile profile(std::span<const double> t, std::span<const double> m, double s1) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double L = std::log1p(t[i] / s1);
    num += m[i] * std::sqrt(L);
    den += L;
  }
  Profile p;
  p.root_s2 = num / den;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = m[i] - p.root_s2 * std::sqrt(std::log1p(t[i] / s1));
    p.cost += r * r;
  }
  return p;
}

// Linear-interpolation sample quantile (Hyndman-Fan type 7) of sorted data.
double sorted_quantile(const std::vector<double>& s, double p) {
  const double h = (static_cast<double>(s.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

}  // namespace

VolatilityFit fit_volatility(std::span<const double> t, std::span<const double> m_hat) {
  if (t.size() != m_hat.size()) throw DomainError("fit_volatility: t and m differ in length");
  if (t.size() < 3) throw InsufficientDataError("fit_volatility: need >= 3 points");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(m_hat[i] > 0.0)) throw DataError("fit_volatility: m_hat must be positive");
    if (!(t[i] > 0.0)) throw DataError("fit_volatility: t must be positive");
  }

  constexpr int kScan = 400;
  const double step = (kLogS1High - kLogS1Low) / kScan;
  int best_k = 0;
  double best_cost = profile(t, m_hat, std::exp(kLogS1Low)).cost;
  for (int k = 1; k <= kScan; ++k) {
    const double c = profile(t, m_hat, std::exp(kLogS1Low + k * step)).cost;
    if (c < best_cost) {
      best_cost = c;
      best_k = k;
    }
  }
  if (best_k == 0 || best_k == kScan) {
    throw ConvergenceError("fit_volatility: no interior optimum for s1 in [1e-6, 1e3]");
  }
  double lo = kLogS1Low + (best_k - 1) * step;
  double hi = kLogS1Low + (best_k + 1) * step;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = profile(t, m_hat, std::exp(x1)).cost, f2 = profile(t, m_hat, std::exp(x2)).cost;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    if (f1 > f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = profile(t, m_hat, std::exp(x2)).cost;
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = profile(t, m_hat, std::exp(x1)).cost;
    }
  }
  const double ls1 = 0.5 * (lo + hi);
  const Profile pr = profile(t, m_hat, std::exp(ls1));

  // Joint polish in (ln s1, ln s2) from the profile optimum.
  const std::size_t n = t.size();
  const ResidualFn rf = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    r.resize(static_cast<Eigen::Index>(n));
    const double s1 = std::exp(x[0]), s2 = std::exp(x[1]);
    for (std::size_t i = 0; i < n; ++i) {
      r[static_cast<Eigen::Index>(i)] = std::sqrt(s2 * std::log1p(t[i] / s1)) - m_hat[i];
    }
  };
  const JacobianFn jf = [&](const Eigen::VectorXd& x, Eigen::MatrixXd& J) {
    J.resize(static_cast<Eigen::Index>(n), 2);
    const double s1 = std::exp(x[0]), s2 = std::exp(x[1]);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      const double L = std::log1p(t[i] / s1);
      const double m = std::sqrt(s2 * L);
      J(row, 0) = -s2 * t[i] / (t[i] + s1) / (2.0 * m);
      J(row, 1) = 0.5 * m;
    }
  };
  Eigen::VectorXd x0(2);
  x0 << ls1, 2.0 * std::log(pr.root_s2);
  LevMarOptions lm;
  double sum_sq = 0.0;
  for (double v : m_hat) sum_sq += v * v;
  lm.cost_floor = 1e-26 * sum_sq;
  lm.gradient_tol = 1e-10;
  const LevMarResult res = levenberg_marquardt(rf, jf, x0, lm);
  const Eigen::VectorXd& x = res.cost <= 0.5 * pr.cost ? res.x : x0;

  VolatilityFit fit;
  fit.n = n;
  fit.s1 = std::exp(x[0]);
  fit.s2 = std::exp(x[1]);
  double ss_res = 0.0, mean_m = 0.0;
  for (double v : m_hat) mean_m += v;
  mean_m /= static_cast<double>(n);
  double ss_tot = 0.0;
  Eigen::MatrixXd J(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const double L = std::log1p(t[i] / fit.s1);
    const double m = std::sqrt(fit.s2 * L);
    ss_res += (m_hat[i] - m) * (m_hat[i] - m);
    ss_tot += (m_hat[i] - mean_m) * (m_hat[i] - mean_m);
    J(row, 0) = -fit.s2 * t[i] / (fit.s1 * (t[i] + fit.s1)) / (2.0 * m);
    J(row, 1) = m / (2.0 * fit.s2);
  }
  fit.r2_adj = stats::adjusted_r2(ss_res, ss_tot, n, 2);
  if (n > 2) {
    const Eigen::Matrix2d info = J.transpose() * J;
    const Eigen::Matrix2d cov = info.inverse() * (ss_res / static_cast<double>(n - 2));
    fit.s1_se = std::sqrt(std::max(0.0, cov(0, 0)));
    fit.s2_se = std::sqrt(std::max(0.0, cov(1, 1)));
  }
  return fit;
}

double beta_star(double t, const VolatilityFit& vol) {
  if (t < 0.0) throw DomainError("beta_star: t must be >= 0");
  return std::sqrt(vol.s2 / (t + vol.s1));
}

double integrated_variance(double a, double b, const VolatilityFit& vol) {
  return vol.s2 * std::log1p((b - a) / (a + vol.s1));
}

std::size_t PathEnsemble::index_of(double t) const {
  if (grid.empty()) throw DomainError("empty ensemble grid");
  const double h = grid.size() > 1 ? grid[1] - grid[0] : 1.0;
  const double k = std::round((t - grid.front()) / h);
  if (k < 0 || k >= static_cast<double>(grid.size()) ||
      std::abs(grid[static_cast<std::size_t>(k)] - t) > 1e-9 * (1.0 + std::abs(t))) {
    throw DomainError("time " + csv::format_double(t) + " is not on the ensemble grid");
  }
  return static_cast<std::size_t>(k);
}

std::vector<double> PathEnsemble::column(std::size_t i) const {
  std::vector<double> c(n_paths);
  for (std::size_t k = 0; k < n_paths; ++k) c[k] = at(k, i);
  return c;
}

PathEnsemble simulate_ensemble(const HistoryParams& params, const VolatilityFit& vol,
                               const SdeConfig& config) {
  if (!(config.dt > 0.0 && config.dt <= 1.0)) throw DomainError("dt must lie in (0, 1]");
  if (!(config.horizon >= config.dt)) throw DomainError("horizon must be >= dt");
  if (config.n_paths < 1) throw DomainError("n_paths must be >= 1");
  if (!(vol.s1 > 0.0) || !(vol.s2 >= 0.0)) throw DomainError("need s1 > 0 and s2 >= 0");
  const double steps_real = config.horizon / config.dt;
  const auto steps = static_cast<std::size_t>(std::llround(steps_real));
  if (std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * steps_real) {
    throw DomainError("horizon must be an integer multiple of dt");
  }

  PathEnsemble e;
  e.params = params;
  e.vol = vol;
  e.config = config;
  e.n_paths = config.n_paths;
  e.grid.resize(steps + 1);
  std::vector<double> log_u(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    e.grid[i] = static_cast<double>(i) * config.dt;
    const double u = eval_history(params, e.grid[i]);
    if (!(u > 0.0)) throw DomainError("u(t) must be positive on the simulation grid");
    log_u[i] = std::log(u);
  }

  kernels::PathProblem problem;
  problem.x0 = std::exp(log_u[0]);
  problem.seed = config.seed;
  problem.n_paths = config.n_paths;
  problem.scheme = config.scheme;
  problem.log_drift.resize(steps);
  problem.step_variance.resize(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    problem.log_drift[i] = log_u[i + 1] - log_u[i];
    problem.step_variance[i] = config.scheme == kernels::Scheme::ExactLog
                                   ? integrated_variance(e.grid[i], e.grid[i + 1], vol)
                                   : vol.s2 * config.dt / (e.grid[i] + vol.s1);
  }
  e.x.resize(config.n_paths * (steps + 1));
  if (config.parallel) {
    kernels::simulate_paths_parallel(problem, e.x);
  } else {
    kernels::simulate_paths_serial(problem, e.x);
  }
  return e;
}

double log_w(double t, const VolatilityFit& vol) { return 0.5 * vol.s2 * std::log1p(t / vol.s1); }

double closed_form_density(double x, double t, const HistoryParams& params,
                           const VolatilityFit& vol) {
  if (!(t > 0.0)) throw DomainError("closed_form_density: t must be > 0");
  const double lw = log_w(t, vol);
  if (!(lw > 0.0)) throw DomainError("closed_form_density: ln w(t) must be > 0");
  if (!(x > 0.0)) return 0.0;
  const double z = std::log(x) + lw - std::log(eval_history(params, t));
  return std::exp(-z * z / (4.0 * lw)) / (x * std::sqrt(4.0 * std::numbers::pi * lw));
}

double closed_form_cdf(double x, double t, const HistoryParams& params, const VolatilityFit& vol) {
  if (!(t > 0.0)) throw DomainError("closed_form_cdf: t must be > 0");
  const double lw = log_w(t, vol);
  if (!(lw > 0.0)) throw DomainError("closed_form_cdf: ln w(t) must be > 0");
  if (!(x > 0.0)) return 0.0;
  const double z = std::log(x) + lw - std::log(eval_history(params, t));
  return normal_cdf(z / std::sqrt(2.0 * lw));
}

std::vector<std::int64_t> count_citations(const PathEnsemble& e, CountingMode mode, double T) {
  if (e.n_paths == 0) throw DataError("count_citations: empty ensemble");
  const std::size_t last = e.index_of(T);
  std::vector<std::int64_t> out(e.n_paths);
  if (mode == CountingMode::IntegralFloor) {
    for (std::size_t k = 0; k < e.n_paths; ++k) {
      double s = 0.0;
      for (std::size_t i = 1; i <= last; ++i) {
        s += 0.5 * (e.grid[i] - e.grid[i - 1]) * (e.at(k, i) + e.at(k, i - 1));
      }
      out[k] = static_cast<std::int64_t>(std::floor(s));
    }
    return out;
  }
  std::vector<std::size_t> years;
  for (int y = 0; y < T - 1e-9; ++y) years.push_back(e.index_of(y));
  for (std::size_t k = 0; k < e.n_paths; ++k) {
    std::int64_t s = 0;
    for (std::size_t i : years) s += static_cast<std::int64_t>(std::floor(e.at(k, i)));
    out[k] = s;
  }
  return out;
}

void write_ensemble_csv(std::ostream& out, const PathEnsemble& e, std::size_t stride) {
  if (stride == 0) throw DomainError("stride must be >= 1");
  out << "path_id,t,x\n";
  for (std::size_t k = 0; k < e.n_paths; ++k) {
    for (std::size_t i = 0; i < e.grid.size(); i += stride) {
      out << k << ',' << csv::format_double(e.grid[i]) << ',' << csv::format_double(e.at(k, i))
          << '\n';
    }
  }
}

void write_ensemble_summary_csv(std::ostream& out, const PathEnsemble& e, std::size_t stride) {
  if (stride == 0) throw DomainError("stride must be >= 1");
  out << "t,mean,var,q05,q50,q95\n";
  for (std::size_t i = 0; i < e.grid.size(); i += stride) {
    std::vector<double> c = e.column(i);
    const double m = stats::mean(c);
    const double v = c.size() > 1 ? stats::variance(c) : 0.0;
    std::sort(c.begin(), c.end());
    out << csv::format_double(e.grid[i]) << ',' << csv::format_double(m) << ','
        << csv::format_double(v) << ',' << csv::format_double(sorted_quantile(c, 0.05)) << ','
        << csv::format_double(sorted_quantile(c, 0.5)) << ','
        << csv::format_double(sorted_quantile(c, 0.95)) << '\n';
  }
}

double expected_log_factor(double b) {
  if (!(b >= 0.0 && b < 1.0)) throw DomainError("epsilon bound must lie in [0, 1)");
  if (b == 0.0) return 0.0;
  // Antiderivative of ln(1 + e) is (1 + e) ln(1 + e) - (1 + e).
  auto F = [](double e) { return (1.0 + e) * std::log1p(e) - (1.0 + e); };
  return (F(b) - F(-b)) / (2.0 * b);
}

TimingReport simulate_timing_clt(const TimingSimConfig& config) {
  if (!(config.t0 > 0.0)) throw DomainError("t0 must be positive");
  if (config.n_events < 1) throw DomainError("n_events must be >= 1");
  if (config.n_samples < 2) throw DomainError("n_samples must be >= 2");
  const double b = config.epsilon_bound;
  TimingReport rep;
  rep.expected_log_mean = std::log(config.t0) + config.n_events * expected_log_factor(b);
  rep.log_t.resize(config.n_samples);
  const auto n = static_cast<std::int64_t>(config.n_samples);
  const double lt0 = std::log(config.t0);
#pragma omp parallel for schedule(static)
  for (std::int64_t s = 0; s < n; ++s) {
    StreamRng rng(config.seed, static_cast<std::uint64_t>(s));
    double acc = lt0;
    for (int j = 0; j < config.n_events; ++j) acc += std::log1p(rng.uniform(-b, b));
    rep.log_t[static_cast<std::size_t>(s)] = acc;
  }
  rep.log_moments = stats::moments(rep.log_t);
  rep.jarque_bera = stats::jarque_bera(rep.log_moments);
  return rep;
}

}  // namespace citedyn
