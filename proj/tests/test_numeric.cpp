#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "doctest.h"

#include "citedyn/csv.hpp"
#include "citedyn/errors.hpp"
#include "citedyn/levmar.hpp"
#include "citedyn/normal.hpp"
#include "citedyn/rng.hpp"
#include "citedyn/stats.hpp"

using namespace citedyn;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

double phi_oracle(double x) {
  const Big bx(x);
  return static_cast<double>(Big(0.5) * boost::multiprecision::erfc(-bx / boost::multiprecision::sqrt(Big(2))));
}

// Bisection on the 50-digit distribution function.
double quantile_oracle(double q) {
  Big lo(-40), hi(40);
  const Big target(q);
  for (int i = 0; i < 200; ++i) {
    const Big mid = (lo + hi) / 2;
    const Big p = Big(0.5) * boost::multiprecision::erfc(-mid / boost::multiprecision::sqrt(Big(2)));
    (p < target ? lo : hi) = mid;
  }
  return static_cast<double>((lo + hi) / 2);
}

}  // namespace

TEST_CASE("normal_cdf agrees with a 50-digit erf") {
  for (double x = -37.0; x <= 8.0; x += 0.173) {
    const double want = phi_oracle(x);
    CHECK(std::abs(normal_cdf(x) - want) <= 1e-14);
    if (want > 1e-300) CHECK(std::abs(normal_cdf(x) - want) / want <= 1e-12);
  }
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(-1.122) == doctest::Approx(0.1310).epsilon(1e-3));
}

TEST_CASE("normal_quantile inverts the distribution function") {
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(normal_quantile(0.999) == doctest::Approx(3.0902).epsilon(1e-4));
  for (double lq = -8.0; lq <= -1e-9; lq += 0.05) {
    for (double q : {std::pow(10.0, lq), 1.0 - std::pow(10.0, lq)}) {
      if (q <= 0.0 || q >= 1.0) continue;
      CHECK(std::abs(normal_cdf(normal_quantile(q)) - q) <= 1e-12);
    }
  }
  for (double q : {1e-8, 1e-4, 0.02425, 0.3, 0.7, 0.97575, 1 - 1e-6}) {
    CHECK(normal_quantile(q) == doctest::Approx(quantile_oracle(q)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(normal_quantile(0.0), DomainError);
  CHECK_THROWS_AS(normal_quantile(1.0), DomainError);
  CHECK(normal_cdf_quantile(NormalMode::Quantile, 0.5) == 0.0);
  CHECK(normal_cdf_quantile(NormalMode::Cdf, 0.0) == 0.5);
}

TEST_CASE("pairwise summation is exact on integers and stable") {
  std::vector<double> v(100000, 0.1);
  CHECK(stats::pairwise_sum(v) == doctest::Approx(10000.0).epsilon(1e-13));
  std::vector<double> ints(1000);
  std::iota(ints.begin(), ints.end(), 1.0);
  CHECK(stats::pairwise_sum(ints) == 500500.0);
  CHECK(stats::mean(ints) == 500.5);
  CHECK(stats::variance(std::vector<double>{1, 2, 3, 4}) == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("mid ranks match brute-force counting") {
  const std::vector<double> v = {3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5};
  const auto q = stats::mid_ranks(v);
  for (std::size_t k = 0; k < v.size(); ++k) {
    double less = 0, equal = 0;
    for (double w : v) {
      less += w < v[k];
      equal += w == v[k];
    }
    CHECK(q[k] == doctest::Approx((less + 0.5 * equal) / v.size()));
  }
}

TEST_CASE("simple OLS recovers an exact line and rejects degenerate designs") {
  const std::vector<double> x = {0, 1, 2, 3, 4};
  std::vector<double> y;
  for (double xi : x) y.push_back(2.0 - 0.5 * xi);
  const auto fit = stats::simple_ols(x, y);
  CHECK(fit.intercept == doctest::Approx(2.0));
  CHECK(fit.slope == doctest::Approx(-0.5));
  CHECK(fit.r2_adj == doctest::Approx(1.0));
  CHECK_THROWS_AS(stats::simple_ols(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}),
                  DegenerateError);
  CHECK_THROWS_AS(stats::simple_ols(std::vector<double>{1, 2}, std::vector<double>{1, 2}),
                  InsufficientDataError);
}

TEST_CASE("moments and Jarque-Bera") {
  StreamRng rng(3, 0);
  std::vector<double> normal(20000), uniform(20000);
  for (auto& v : normal) v = rng.normal();
  for (auto& v : uniform) v = rng.uniform();
  const auto mn = stats::moments(normal);
  CHECK(std::abs(mn.skewness) < 0.05);
  CHECK(std::abs(mn.excess_kurtosis) < 0.1);
  const auto mu = stats::moments(uniform);
  CHECK(mu.excess_kurtosis == doctest::Approx(-1.2).epsilon(0.05));
  CHECK(stats::jarque_bera(mu).p_value < 1e-10);
  CHECK(stats::jarque_bera(mn).p_value > 1e-4);
}

TEST_CASE("one-way ANOVA against hand computation and permutations") {
  SUBCASE("identical groups") {
    const std::vector<std::vector<double>> g = {{1, 2, 3, 4}, {1, 2, 3, 4}};
    const auto a = stats::one_way_anova(g);
    CHECK(a.f == 0.0);
    REQUIRE(a.p_value);
    CHECK(*a.p_value == doctest::Approx(1.0));
  }
  SUBCASE("shifted group is isolated") {
    StreamRng rng(17, 0);
    std::vector<std::vector<double>> g(3, std::vector<double>(100));
    for (std::size_t j = 0; j < 3; ++j) {
      for (auto& v : g[j]) v = rng.normal() + (j == 2 ? 2.0 : 0.0);
    }
    const auto a = stats::one_way_anova(g);
    REQUIRE(a.p_value);
    CHECK(*a.p_value < 0.01);

    // Permutation oracle: the observed F exceeds every relabelled F.
    std::vector<double> pooled;
    for (const auto& grp : g) pooled.insert(pooled.end(), grp.begin(), grp.end());
    StreamRng perm(99, 0);
    int exceed = 0;
    for (int rep = 0; rep < 200; ++rep) {
      for (std::size_t i = pooled.size() - 1; i > 0; --i) {
        std::swap(pooled[i], pooled[perm.next_u64() % (i + 1)]);
      }
      std::vector<std::vector<double>> h(3);
      for (std::size_t i = 0; i < pooled.size(); ++i) h[i / 100].push_back(pooled[i]);
      exceed += stats::one_way_anova(h).f >= a.f;
    }
    CHECK(exceed == 0);

    const auto pw = stats::bonferroni_pairwise(g);
    REQUIRE(pw.size() == 3);
    for (const auto& t : pw) {
      REQUIRE(t.p_adjusted);
      CHECK(*t.p_adjusted <= 1.0);
      CHECK(*t.p_adjusted == doctest::Approx(std::min(1.0, *t.p_raw * 3)));
      if (t.second == 2) {
        CHECK(*t.p_adjusted < 0.01);
      } else {
        CHECK(*t.p_adjusted > 0.01);
      }
    }
    const auto w = stats::one_way_anova(g, true);
    REQUIRE(w.p_value);
    CHECK(*w.p_value < 0.01);
  }
  SUBCASE("F against the textbook formula") {
    const std::vector<std::vector<double>> g = {{2, 3, 4}, {5, 6, 7, 8}, {1, 1, 2}};
    double grand = 0, n = 0;
    for (const auto& x : g) for (double v : x) grand += v, ++n;
    grand /= n;
    double ssb = 0, ssw = 0;
    for (const auto& x : g) {
      const double m = stats::mean(x);
      ssb += x.size() * (m - grand) * (m - grand);
      for (double v : x) ssw += (v - m) * (v - m);
    }
    const double f = (ssb / 2) / (ssw / (n - 3));
    const auto a = stats::one_way_anova(g);
    CHECK(a.f == doctest::Approx(f));
    CHECK(a.df_between == 2);
    CHECK(a.df_within == n - 3);
  }
}

TEST_CASE("F and t tail probabilities") {
  CHECK(stats::f_sf(0.0, 2, 10) == doctest::Approx(1.0));
  // F(1, d) = t(d)^2.
  CHECK(stats::f_sf(4.0, 1, 12) == doctest::Approx(stats::t_two_sided_p(2.0, 12)));
  CHECK(stats::t_two_sided_p(2.228138851986274, 10) == doctest::Approx(0.05).epsilon(1e-6));
}

TEST_CASE("kernel density estimate") {
  StreamRng rng(5, 0);
  std::vector<double> v(10000);
  for (auto& x : v) x = rng.normal();
  const auto d = stats::kde(v, 0.2);
  CHECK(d.x.size() == 512);
  CHECK(stats::trapezoid(d.x, d.density) == doctest::Approx(1.0).epsilon(1e-3));
  const auto at0 = std::min_element(d.x.begin(), d.x.end(),
                                    [](double a, double b) { return std::abs(a) < std::abs(b); });
  CHECK(std::abs(d.density[at0 - d.x.begin()] - 0.3989) < 0.02);

  const auto serial = stats::kde_serial(v, 0.2);
  CHECK(serial.density == d.density);

  SUBCASE("two modes 3h apart") {
    std::vector<double> mix;
    for (int i = 0; i < 2000; ++i) mix.push_back((i % 2 ? 0.6 : 0.0) + 0.03 * rng.normal());
    const auto m = stats::kde(mix, 0.2);
    int maxima = 0;
    for (std::size_t i = 1; i + 1 < m.density.size(); ++i) {
      maxima += m.density[i] > m.density[i - 1] && m.density[i] >= m.density[i + 1];
    }
    CHECK(maxima == 2);
  }
  SUBCASE("repeated value gives a symmetric bump") {
    const std::vector<double> same(10, 1.5);
    const auto b = stats::kde(same, 0.2);
    for (std::size_t i = 0; i < b.density.size(); ++i) {
      CHECK(b.density[i] == doctest::Approx(b.density[b.density.size() - 1 - i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("KS statistic of a uniform sample") {
  std::vector<double> v;
  for (int i = 0; i < 100; ++i) v.push_back((i + 0.5) / 100.0);
  CHECK(stats::ks_statistic(v, [](double x) { return x; }) == doctest::Approx(0.005));
}

TEST_CASE("Levenberg-Marquardt on an exponential decay") {
  std::vector<double> t, y;
  for (int i = 0; i < 20; ++i) {
    t.push_back(i * 0.25);
    y.push_back(3.0 * std::exp(-0.7 * t.back()) + 0.2);
  }
  const ResidualFn rf = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    r.resize(static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) r[i] = y[i] - (x[0] * std::exp(-x[1] * t[i]) + x[2]);
  };
  const JacobianFn jf = [&](const Eigen::VectorXd& x, Eigen::MatrixXd& J) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double e = std::exp(-x[1] * t[i]);
      J(i, 0) = -e;
      J(i, 1) = x[0] * t[i] * e;
      J(i, 2) = -1.0;
    }
  };
  Eigen::VectorXd x0(3);
  x0 << 1.0, 0.1, 0.0;
  const auto res = levenberg_marquardt(rf, jf, x0);
  CHECK(res.converged);
  CHECK(res.x[0] == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(res.x[1] == doctest::Approx(0.7).epsilon(1e-8));
  CHECK(res.x[2] == doctest::Approx(0.2).epsilon(1e-8));

  SUBCASE("box-constrained optimum on the bound converges") {
    LevMarOptions o;
    o.lower = Eigen::Vector3d(0.0, 0.0, 0.5);
    o.upper = Eigen::Vector3d(10.0, 10.0, 10.0);
    Eigen::VectorXd start(3);
    start << 1.0, 0.1, 1.0;
    const auto b = levenberg_marquardt(rf, jf, start, o);
    CHECK(b.converged);
    CHECK(b.x[2] == 0.5);
  }
}

TEST_CASE("CSV reading and formatting") {
  std::istringstream in("a,b,\"c,d\"\r\n1,2,3\n\n4,5,6\n");
  const auto t = csv::read(in);
  CHECK(t.header == std::vector<std::string>{"a", "b", "c,d"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.line_numbers[1] == 4);
  CHECK(t.column("c,d") == 2);
  CHECK_THROWS_AS(t.column("zz"), SchemaError);
  std::istringstream bad("a,b\n1\n");
  CHECK_THROWS(csv::read(bad));
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) {
    CHECK(std::stod(csv::format_double(v)) == v);
  }
  CHECK(csv::format_fixed(2.6149, 2) == "2.61");
  CHECK_THROWS(csv::parse_int("x1", 3, "age"));
}
