// Acceptance criteria: one PASS/FAIL line each, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "citedyn/corpus.hpp"
#include "citedyn/distfit.hpp"
#include "citedyn/gamma.hpp"
#include "citedyn/history.hpp"
#include "citedyn/normal.hpp"
#include "citedyn/rng.hpp"
#include "citedyn/stats.hpp"
#include "citedyn/stochastic.hpp"
#include "reference_tables.hpp"
#include "synthetic.hpp"

using namespace citedyn;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

// Closed-form derived metrics against every published row.
Outcome derived_metrics() {
  Outcome o;
  double worst = 0.0;
  std::string failures;
  for (const auto& row : reference::kTable2) {
    const DerivedMetrics m = derive_metrics(row.params());
    const double err = std::max({std::abs(m.delta1 - row.delta1), std::abs(m.delta2 - row.delta2),
                                 std::abs(m.s_rate - row.S), std::abs(m.r_rate - row.R)});
    worst = std::max(worst, err);
    if (err > 0.02) {
      o.pass = false;
      failures += " " + row.discipline + fmt("(R=%.3f vs %.3f)", m.r_rate, row.R);
    }
  }
  o.detail = fmt("max abs error %.4f over 6 rows", worst) + failures;
  return o;
}

Outcome peak_reproduction() {
  Outcome o;
  double worst = 0.0;
  std::string failures;
  for (const auto& row : reference::kTable2) {
    const double u = find_peak(row.params()).u;
    const double err = std::abs(u - row.u_peak);
    worst = std::max(worst, err);
    if (err > 0.01) {
      o.pass = false;
      failures += " " + row.discipline + fmt("(%.3f vs %.3f)", u, row.u_peak);
    }
  }
  o.detail = fmt("max abs error %.4f over 6 rows", worst) + failures;
  return o;
}

// Every cell of the published table is evaluated. The criterion needs at
// least 12 cells within 0.01 spread over astro-ph, hep and comp-sci, and every
// masked cell (comp-sci c=5, T>=4 among them) masked.
Outcome ready_reckoner() {
  Outcome o;
  const std::vector<int> ages = {2, 3, 4, 5, 6, 7, 8, 9, 10};
  int cells = 0, within = 0, masked_ok = 0, masked = 0;
  std::map<std::string, int> within_by;
  std::string misses;
  for (const auto& want : reference::kTable3) {
    const auto& row =
        *std::find_if(reference::kTable2.begin(), reference::kTable2.end(),
                      [&](const reference::PublishedRow& r) { return r.discipline == want.discipline; });
    const std::vector<double> levels = {static_cast<double>(want.c)};
    const ReadyReckoner table = build_reckoner(want.discipline, row.params(), levels, ages);
    for (std::size_t j = 0; j < ages.size(); ++j) {
      const auto& got = table.values[0][j];
      ++cells;
      if (std::isnan(want.gamma[j])) {
        ++masked;
        if (!got) ++masked_ok;
        continue;
      }
      if (got && std::abs(*got - want.gamma[j]) <= 0.01) {
        ++within;
        ++within_by[want.discipline];
      } else {
        misses += " " + want.discipline + fmt(" c=%.0f T=%.0f (%.3f vs %.2f)", want.c, ages[j],
                                              got ? *got : NAN, want.gamma[j]);
      }
    }
  }
  o.pass = within >= 12 && masked_ok == masked && within_by["astro-ph"] > 0 &&
           within_by["hep"] > 0 && within_by["comp-sci"] > 0;
  o.detail = fmt("%.0f/%.0f valued cells within 0.01, %.0f/%.0f masked cells masked;", within,
                 cells - masked, masked_ok, masked) +
             (misses.empty() ? std::string(" no misses") : " outside:" + misses);
  return o;
}

Outcome fit_round_trip() {
  Outcome o;
  double worst_clean = 0.0, worst_noisy = 0.0, worst_lambda = 0.0;
  int rows = 0;
  std::string failures;
  std::uint64_t stream = 0;
  for (const auto& table : reference::kAllParameterTables) {
    for (const auto& row : table) {
      ++rows;
      const HistoryParams truth = row.params();
      for (bool noisy : {false, true}) {
        const auto panel = synthetic::history_points(truth, 20, noisy ? 0.02 : 0.0, 2024, ++stream);
        const HistoryFit fit = fit_history_points(panel.t, panel.u, {});
        const HistoryParams& p = fit.params;
        const double err = std::max({rel(p.A, truth.A), rel(p.mu, truth.mu),
                                     rel(p.sigma, truth.sigma), rel(p.B, truth.B)});
        const double tol = noisy ? 0.10 : 0.01;
        bool ok = fit.converged && err <= tol;
        if (noisy) {
          worst_noisy = std::max(worst_noisy, err);
        } else {
          worst_clean = std::max(worst_clean, err);
          const bool lambda_ok = truth.lambda_capped
                                     ? p.lambda_capped
                                     : (!p.lambda_capped && rel(p.lambda, truth.lambda) <= 0.10);
          if (!truth.lambda_capped) worst_lambda = std::max(worst_lambda, rel(p.lambda, truth.lambda));
          ok = ok && lambda_ok;
        }
        if (!ok) {
          o.pass = false;
          failures += " " + row.discipline + (noisy ? "/noisy" : "/clean") + fmt("(%.3f)", err);
        }
      }
    }
  }
  o.detail = fmt("%.0f rows; max rel error clean %.2e, lambda %.2e, 2%% noise %.3f", rows,
                 worst_clean, worst_lambda, worst_noisy) +
             failures;
  return o;
}

Outcome lognormal_quantile() {
  Outcome o;
  const auto counts = synthetic::lognormal_counts(reference::kAstroQuantileB,
                                                  reference::kAstroQuantileM, 10000, 11);
  const LognormalFit mc = fit_lognormal_quantile(make_quantile_series(counts, false));
  o.pass = std::abs(mc.b - reference::kAstroQuantileB) <= 0.05 &&
           std::abs(mc.m - reference::kAstroQuantileM) <= 0.05 && mc.r2_adj > 0.99;

  // Noiseless linear data: one point per rank, y exactly on the line.
  QuantileSeries exact;
  const std::size_t n = 500;
  for (std::size_t k = 0; k < n; ++k) {
    const double q = (k + 0.5) / n;
    exact.points.push_back({1.08 + 1.07 * normal_quantile(q), q, 0, 1});
  }
  exact.n_total = n;
  const LognormalFit line = fit_lognormal_quantile(exact);
  const double line_err = std::max(std::abs(line.b - 1.08), std::abs(line.m - 1.07));
  o.pass = o.pass && line_err <= 1e-6;
  o.detail = fmt("MC b=%.4f m=%.4f r2_adj=%.4f; exact-line error %.1e", mc.b, mc.m, mc.r2_adj,
                 line_err);
  return o;
}

const reference::PublishedRow& astro() { return reference::kTable2.front(); }
VolatilityFit astro_vol() {
  VolatilityFit v;
  v.s1 = reference::kVolatility.front().s1;
  v.s2 = reference::kVolatility.front().s2;
  return v;
}

// Shared by criteria 6-8.
const PathEnsemble& astro_ensemble() {
  static const PathEnsemble e = [] {
    SdeConfig c;
    c.dt = 0.01;
    c.horizon = 10.0;
    c.n_paths = 10000;
    c.seed = 20240601;
    return simulate_ensemble(astro().params(), astro_vol(), c);
  }();
  return e;
}

Outcome sde_mean_recovery() {
  Outcome o;
  const PathEnsemble& e = astro_ensemble();
  std::string detail;
  for (double t : {1.0, 5.0, 10.0}) {
    const auto col = e.column(e.index_of(t));
    const double m = stats::mean(col);
    const double se = std::sqrt(stats::variance(col) / col.size());
    const double z = (m - eval_history(astro().params(), t)) / se;
    o.pass = o.pass && std::abs(z) <= 3.0;
    detail += fmt("z(%.0f)=%+.2f ", t, z);
  }
  const auto col = e.column(e.index_of(10.0));
  std::vector<double> lx(col.size());
  std::transform(col.begin(), col.end(), lx.begin(), [](double x) { return std::log(x); });
  const double v = stats::variance(lx);
  const VolatilityFit vol = astro_vol();
  const double want = vol.s2 * std::log(10.0 / vol.s1 + 1.0);
  o.pass = o.pass && rel(v, want) <= 0.05;
  o.detail = detail + fmt("Var ln X(10)=%.4f vs %.4f", v, want);
  return o;
}

Outcome lognormal_law() {
  const auto counts = count_citations(astro_ensemble(), CountingMode::IntegralFloor, 10.0);
  const LognormalFit fit = fit_lognormal_quantile(make_quantile_series(counts, false));
  return {fit.r2_adj > 0.98, fmt("c(10): b=%.3f m=%.3f r2_adj=%.4f", fit.b, fit.m, fit.r2_adj)};
}

Outcome fokker_planck() {
  const HistoryParams p = astro().params();
  const VolatilityFit v = astro_vol();
  const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double x) { return closed_form_density(x, 5.0, p, v); }, 0.0,
      std::numeric_limits<double>::infinity(), 15, 1e-12);
  const auto col = astro_ensemble().column(astro_ensemble().index_of(5.0));
  const double ks =
      stats::ks_statistic(col, [&](double x) { return closed_form_cdf(x, 5.0, p, v); });
  return {std::abs(mass - 1.0) <= 1e-6 && ks < 0.02,
          fmt("integral-1=%.1e KS=%.4f (n=10000)", mass - 1.0, ks)};
}

Outcome gamma_star_standardisation() {
  Outcome o;
  const auto scores = synthetic::grouped_gamma_scores(10000, 6, 99);
  const auto stars = gamma_star_scores(scores, StarGrouping::Discipline);
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    groups[scores[i].discipline].first.push_back(scores[i].gamma);
    groups[scores[i].discipline].second.push_back(stars[i].gamma_star);
  }
  double worst_mean = 0.0, worst_sd = 0.0, min_r = 1.0;
  for (const auto& [d, g] : groups) {
    const double m = stats::mean(g.second);
    const double sd = std::sqrt(stats::variance(g.second));
    worst_mean = std::max(worst_mean, std::abs(m));
    worst_sd = std::max(worst_sd, std::abs(sd - 1.0));
    min_r = std::min(min_r, stats::pearson_r(g.first, g.second));
  }
  o.pass = groups.size() == 6 && worst_mean <= 0.05 && worst_sd <= 0.05 && min_r > 0.98;
  o.detail = fmt("6 groups: max |mean| %.4f, max |sd-1| %.4f, min Pearson r %.4f", worst_mean,
                 worst_sd, min_r);
  return o;
}

Outcome timing_clt() {
  const TimingReport many = simulate_timing_clt({1.0, 100, 0.1, 10000, 5});
  const TimingReport one = simulate_timing_clt({1.0, 1, 0.1, 10000, 5});
  const bool ok = std::abs(many.log_moments.skewness) < 0.1 &&
                  std::abs(many.log_moments.excess_kurtosis) < 0.2 &&
                  one.jarque_bera.p_value < 0.001;
  return {ok, fmt("n=100: skew %+.4f, exkurt %+.4f; n=1: JB=%.1f p=%.1e",
                  many.log_moments.skewness, many.log_moments.excess_kurtosis,
                  one.jarque_bera.statistic, one.jarque_bera.p_value)};
}

Outcome trend_machinery() {
  const CitationCorpus corpus = synthetic::trend_corpus();
  const auto panels = build_trend_subsets(corpus, "astro-ph", 2010, 2019, 1.0, 20);
  const auto series = trend_metrics(panels);
  bool s_up = true, r_down = true, r_up = true, converged = true;
  for (std::size_t i = 0; i < series.size(); ++i) {
    converged = converged && series[i].converged;
    if (i == 0) continue;
    s_up = s_up && series[i].s_rate > series[i - 1].s_rate;
    r_down = r_down && series[i].r_rate < series[i - 1].r_rate;
    r_up = r_up && series[i].r_rate > series[i - 1].r_rate;
  }
  const bool ok = series.size() == 10 && converged && s_up && (r_down || r_up);
  return {ok, fmt("S %.3f -> %.3f, R %.3f -> %.3f", series.front().s_rate, series.back().s_rate,
                  series.front().r_rate, series.back().r_rate) +
                  (s_up ? " S strictly increasing" : " S NOT increasing") +
                  (r_down || r_up ? ", R monotone" : ", R NOT monotone")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "derived-metric closed forms", 1.0, derived_metrics},
      {2, "peak reproduction", 1.0, peak_reproduction},
      {3, "ready reckoner", 1.0, ready_reckoner},
      {4, "fit round-trip", 30.0, fit_round_trip},
      {5, "lognormal quantile fit", 5.0, lognormal_quantile},
      {6, "SDE mean recovery", 30.0, sde_mean_recovery},
      {7, "lognormal law emergence", 30.0, lognormal_law},
      {8, "Fokker-Planck consistency", 30.0, fokker_planck},
      {9, "gamma* standardisation", 5.0, gamma_star_standardisation},
      {10, "timing CLT", 5.0, timing_clt},
      {11, "trend machinery", 60.0, trend_machinery},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_s) {
      o.pass = false;
      o.detail += fmt(" [over budget %.0f s]", c.budget_s);
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %2d %-30s %6.2fs  %s\n", o.pass ? "PASS" : "FAIL", c.id,
                c.name.c_str(), secs, o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
