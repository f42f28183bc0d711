#include "citedyn/levmar.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace citedyn {
namespace {

bool has_box(const LevMarOptions& o, Eigen::Index n) {
  return o.lower.size() == n && o.upper.size() == n;
}

void project(Eigen::VectorXd& x, const LevMarOptions& o) {
  if (!has_box(o, x.size())) return;
  x = x.cwiseMax(o.lower).cwiseMin(o.upper);
}

// Components that may move: not pinned at a bound with the gradient pushing
// outward, and not numerically flat.
std::vector<bool> free_components(const Eigen::MatrixXd& J, const Eigen::VectorXd& g,
                                  const Eigen::VectorXd& x, const LevMarOptions& o) {
  const bool box = has_box(o, x.size());
  double widest = 0.0;
  for (Eigen::Index j = 0; j < J.cols(); ++j) widest = std::max(widest, J.col(j).norm());
  std::vector<bool> free(static_cast<std::size_t>(J.cols()), true);
  for (Eigen::Index j = 0; j < J.cols(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    if (box) {
      // Descent direction is -g; blocked if it leaves the box.
      if (x[j] >= o.upper[j] && g[j] < 0.0) free[k] = false;
      if (x[j] <= o.lower[j] && g[j] > 0.0) free[k] = false;
    }
    if (J.col(j).norm() <= 1e-9 * widest) free[k] = false;
  }
  return free;
}

// Largest cosine between a free Jacobian column and the residual.
double gradient_measure(const Eigen::MatrixXd& J, const Eigen::VectorXd& r,
                        const Eigen::VectorXd& x, const LevMarOptions& o) {
  const double rn = r.norm();
  if (rn == 0.0) return 0.0;
  const Eigen::VectorXd g = J.transpose() * r;
  const std::vector<bool> free = free_components(J, g, x, o);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < J.cols(); ++j) {
    if (!free[static_cast<std::size_t>(j)]) continue;
    worst = std::max(worst, std::abs(g[j]) / (J.col(j).norm() * rn));
  }
  return worst;
}

}  // namespace

LevMarResult levenberg_marquardt(const ResidualFn& residuals, const JacobianFn& jacobian,
                                 Eigen::VectorXd x0, const LevMarOptions& options) {
  project(x0, options);
  LevMarResult res;
  res.x = std::move(x0);
  Eigen::VectorXd r;
  residuals(res.x, r);
  const Eigen::Index m = r.size();
  const Eigen::Index n = res.x.size();
  Eigen::MatrixXd J(m, n);
  jacobian(res.x, J);
  res.cost = 0.5 * r.squaredNorm();
  const double exact_cost = std::max(options.cost_floor, options.relative_cost_floor * res.cost);

  double damping = options.initial_damping;
  Eigen::VectorXd r_trial(m);
  for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
    if (!std::isfinite(res.cost)) break;
    res.gradient_measure = gradient_measure(J, r, res.x, options);
    if (res.cost <= exact_cost || res.gradient_measure <= options.gradient_tol) {
      res.converged = true;
      break;
    }
    const Eigen::VectorXd g_full = J.transpose() * r;
    // The step is solved over free components only; the rest stay put.
    const std::vector<bool> free = free_components(J, g_full, res.x, options);
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (free[static_cast<std::size_t>(j)]) idx.push_back(j);
    }
    const auto nf = static_cast<Eigen::Index>(idx.size());
    if (nf == 0) break;
    Eigen::MatrixXd Jf(m, nf);
    for (Eigen::Index k = 0; k < nf; ++k) Jf.col(k) = J.col(idx[static_cast<std::size_t>(k)]);
    const Eigen::MatrixXd JtJ = Jf.transpose() * Jf;
    const Eigen::VectorXd g = Jf.transpose() * r;
    const Eigen::VectorXd diag = JtJ.diagonal().cwiseMax(1e-300);

    bool accepted = false;
    bool step_small = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal() += damping * diag;
      const Eigen::VectorXd dxf = A.ldlt().solve(-g);
      Eigen::VectorXd x_trial = res.x;
      for (Eigen::Index k = 0; k < nf; ++k) x_trial[idx[static_cast<std::size_t>(k)]] += dxf[k];
      project(x_trial, options);
      const Eigen::VectorXd actual = x_trial - res.x;
      if (actual.norm() <= options.step_tol * (res.x.norm() + options.step_tol)) {
        step_small = true;
        break;
      }
      residuals(x_trial, r_trial);
      const double cost_trial = 0.5 * r_trial.squaredNorm();
      if (std::isfinite(cost_trial) && cost_trial < res.cost) {
        res.x = x_trial;
        r = r_trial;
        res.cost = cost_trial;
        jacobian(res.x, J);
        damping = std::max(damping / 3.0, 1e-12);
        accepted = true;
        break;
      }
      damping *= 4.0;
      if (damping > 1e16) break;
    }
    if (!accepted || step_small) break;
  }
  res.gradient_measure = gradient_measure(J, r, res.x, options);
  res.converged = std::isfinite(res.cost) && (res.cost <= exact_cost ||
                                              res.gradient_measure <= options.gradient_tol);
  res.jacobian = J;
  return res;
}

}  // namespace citedyn
