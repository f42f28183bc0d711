#include "citedyn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

#include "citedyn/errors.hpp"
#include "citedyn/rng.hpp"

namespace citedyn::kernels {
namespace {

void check_out(const PathProblem& p, std::span<double> out) {
  if (out.size() != p.n_paths * p.n_points()) {
    throw DomainError("simulate_paths: output buffer has the wrong size");
  }
  if (p.step_variance.size() != p.log_drift.size()) {
    throw DomainError("simulate_paths: drift and variance lengths differ");
  }
}

void one_path(const PathProblem& p, std::size_t path, double* row) {
  StreamRng rng(p.seed, path);
  const std::size_t steps = p.log_drift.size();
  row[0] = p.x0;
  if (p.scheme == Scheme::ExactLog) {
    double y = std::log(p.x0);
    for (std::size_t i = 0; i < steps; ++i) {
      const double v = p.step_variance[i];
      y += p.log_drift[i] - 0.5 * v + std::sqrt(v) * rng.normal();
      row[i + 1] = std::exp(y);
    }
    return;
  }
  double x = p.x0;
  for (std::size_t i = 0; i < steps; ++i) {
    x += x * (p.log_drift[i] + std::sqrt(p.step_variance[i]) * rng.normal());
    // Euler steps can cross zero; paths are floored at the smallest normal.
    x = std::max(x, std::numeric_limits<double>::min());
    row[i + 1] = x;
  }
}

void check_gamma(std::span<const double> c, std::span<const double> T, std::span<double> out) {
  if (c.size() != T.size() || c.size() != out.size()) {
    throw DomainError("gamma_batch: length mismatch");
  }
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!(c[i] >= 1.0)) throw DomainError("gamma index needs c >= 1");
    if (!(T[i] >= 1.0)) throw DomainError("gamma index needs T >= 1");
  }
}

}  // namespace

void simulate_paths_serial(const PathProblem& problem, std::span<double> out) {
  check_out(problem, out);
  const std::size_t width = problem.n_points();
  for (std::size_t k = 0; k < problem.n_paths; ++k) one_path(problem, k, out.data() + k * width);
}

void simulate_paths_parallel(const PathProblem& problem, std::span<double> out) {
  check_out(problem, out);
  const std::size_t width = problem.n_points();
  const auto n = static_cast<std::int64_t>(problem.n_paths);
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k) {
    one_path(problem, static_cast<std::size_t>(k), out.data() + static_cast<std::size_t>(k) * width);
  }
}

void gamma_batch_serial(std::span<const double> c, std::span<const double> T,
                        const HistoryParams& params, std::span<double> out) {
  check_gamma(c, T, out);
  for (std::size_t i = 0; i < c.size(); ++i) {
    out[i] = std::log(c[i] / cumulative_split(params, T[i]).H);
  }
}

void gamma_batch_parallel(std::span<const double> c, std::span<const double> T,
                          const HistoryParams& params, std::span<double> out) {
  check_gamma(c, T, out);
  const auto n = static_cast<std::int64_t>(c.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = std::log(c[k] / cumulative_split(params, T[k]).H);
  }
}

int thread_count() { return omp_get_max_threads(); }

void set_thread_count(int n) {
  if (n < 1) throw UsageError("thread count must be >= 1");
  omp_set_num_threads(n);
}

}  // namespace citedyn::kernels
