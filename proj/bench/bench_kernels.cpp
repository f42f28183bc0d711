// Serial vs OpenMP timings of the data-parallel kernels.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "citedyn/history.hpp"
#include "citedyn/kernels.hpp"
#include "citedyn/rng.hpp"
#include "citedyn/stats.hpp"

using namespace citedyn;

namespace {

double best_of(int reps, const std::function<void()>& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const std::chrono::duration<double> d = std::chrono::steady_clock::now() - t0;
    best = std::min(best, d.count());
  }
  return best;
}

void report(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-10s serial %9.4f s  parallel %9.4f s  speedup %5.2fx  identical %s\n", name, serial,
              parallel, serial / parallel, identical ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
  const double scale = argc > 1 ? std::atof(argv[1]) : 1.0;
  const int reps = 3;
  std::printf("threads %d\n", kernels::thread_count());

  kernels::PathProblem prob;
  prob.x0 = 0.3;
  prob.seed = 1;
  prob.n_paths = static_cast<std::size_t>(10000 * scale);
  for (int i = 0; i < 1000; ++i) {
    prob.log_drift.push_back(1e-3);
    prob.step_variance.push_back(2e-4);
  }
  std::vector<double> a(prob.n_paths * prob.n_points()), b(a.size());
  const double ps = best_of(reps, [&] { kernels::simulate_paths_serial(prob, a); });
  const double pp = best_of(reps, [&] { kernels::simulate_paths_parallel(prob, b); });
  report("paths", ps, pp, a == b);

  const HistoryParams params{2.19, 1.61, 0.817, 0.158, 1.21, false};
  const auto n = static_cast<std::size_t>(2000000 * scale);
  StreamRng rng(2, 0);
  std::vector<double> c(n), T(n), g1(n), g2(n);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = 1.0 + static_cast<double>(rng.next_u64() % 500);
    T[i] = 1.0 + static_cast<double>(rng.next_u64() % 25);
  }
  const double gs = best_of(reps, [&] { kernels::gamma_batch_serial(c, T, params, g1); });
  const double gp = best_of(reps, [&] { kernels::gamma_batch_parallel(c, T, params, g2); });
  report("gamma", gs, gp, g1 == g2);

  std::vector<double> v(static_cast<std::size_t>(200000 * scale));
  for (auto& x : v) x = rng.normal();
  stats::DensityCurve k1, k2;
  const double ks = best_of(reps, [&] { k1 = stats::kde_serial(v, 0.2); });
  const double kp = best_of(reps, [&] { k2 = stats::kde(v, 0.2); });
  report("kde", ks, kp, k1.density == k2.density);
  return 0;
}
