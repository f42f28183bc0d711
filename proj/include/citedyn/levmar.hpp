#pragma once

#include <functional>

#include <Eigen/Dense>

namespace citedyn {

/// Residual callback: fills `r` (size m) for parameters `x` (size n).
using ResidualFn = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r)>;
/// Jacobian callback: fills `J` (m x n) with dr_i/dx_j.
using JacobianFn = std::function<void(const Eigen::VectorXd& x, Eigen::MatrixXd& J)>;

struct LevMarOptions {
  int max_iterations = 400;
  /// Scale-free gradient test: max_j |J_j . r| / (|J_j| |r|) <= gradient_tol.
  double gradient_tol = 1e-8;
  /// Relative step test |dx| <= step_tol (|x| + step_tol).
  double step_tol = 1e-12;
  /// Absolute cost below which the fit is considered exact.
  double cost_floor = 1e-28;
  /// Cost at or below this fraction of the starting cost is also exact.
  double relative_cost_floor = 1e-24;
  double initial_damping = 1e-3;
  /// Optional box; components are projected back after each step.
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct LevMarResult {
  Eigen::VectorXd x;
  double cost = 0.0;  // 0.5 * |r|^2
  int iterations = 0;
  bool converged = false;
  /// Scale-free gradient measure at the returned point over the components
  /// free to move.
  double gradient_measure = 0.0;
  Eigen::MatrixXd jacobian;
};

/// Levenberg-Marquardt with Marquardt's diagonal scaling and projection onto
/// an optional box. Components pinned at a bound with the gradient pushing
/// outward, and numerically flat ones, are held fixed for that step.
/// `converged` is set only by the gradient or cost test; a stalled step
/// without a small gradient is reported as not converged.
LevMarResult levenberg_marquardt(const ResidualFn& residuals, const JacobianFn& jacobian,
                                 Eigen::VectorXd x0, const LevMarOptions& options = {});

}  // namespace citedyn
