#pragma once

// Data-parallel inner loops. Every OpenMP kernel has a serial twin with the
// same signature that produces bit-identical output.

#include <cstdint>
#include <span>
#include <vector>

#include "citedyn/history.hpp"

namespace citedyn::kernels {

enum class Scheme { ExactLog, EulerMaruyama };

/// Per-step inputs shared by all paths on a grid t_0..t_N.
struct PathProblem {
  double x0 = 1.0;
  /// ln u(t_{i+1}) - ln u(t_i), size N.
  std::vector<double> log_drift;
  /// Exact scheme: integral of beta^2 over step i. Euler: beta(t_i)^2 dt.
  std::vector<double> step_variance;
  std::uint64_t seed = 0;
  std::size_t n_paths = 0;
  Scheme scheme = Scheme::ExactLog;

  std::size_t n_points() const { return log_drift.size() + 1; }
};

/// Fills `out` (n_paths x n_points, row-major) with X values.
void simulate_paths_serial(const PathProblem& problem, std::span<double> out);
void simulate_paths_parallel(const PathProblem& problem, std::span<double> out);

/// gamma_i = ln(c_i / H(T_i)).
void gamma_batch_serial(std::span<const double> c, std::span<const double> T,
                        const HistoryParams& params, std::span<double> out);
void gamma_batch_parallel(std::span<const double> c, std::span<const double> T,
                          const HistoryParams& params, std::span<double> out);

/// Number of threads OpenMP regions will use.
int thread_count();
void set_thread_count(int n);

}  // namespace citedyn::kernels
