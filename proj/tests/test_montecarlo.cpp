#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dirtail/aggtail.hpp"
#include "dirtail/errors.hpp"
#include "dirtail/montecarlo.hpp"

using namespace dirtail;

namespace {

AggregateSpec make(std::vector<double> alpha, std::vector<double> lambda, double p, RadialModel r) {
  return validate_spec(alpha, lambda, p, r);
}

// sup |F_n - F| for a sorted sample
template <class Cdf>
double ks_distance(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double dmax = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double f = cdf(xs[k]);
    dmax = std::max({dmax, f - k / n, (k + 1) / n - f});
  }
  return dmax;
}

bool within(const Estimate& a, const Estimate& b, double sigmas) {
  const double se = std::hypot(a.stderr_, b.stderr_);
  return std::abs(a.p_hat - b.p_hat) <= sigmas * se;
}

}  // namespace

TEST_CASE("dirichlet rows sum to a draw of the radial law") {
  const auto s = make({0.5, 2.0, 1.5}, {0.2, 1.0, 0.5}, 1.0, RadialModel::gamma(4.0));
  const auto rows = sample_dirichlet(s, 50000, 17);
  REQUIRE(rows.size() == 50000);
  std::vector<double> sums;
  for (const auto& r : rows) {
    REQUIRE(r.size() == 3);
    for (double x : r) CHECK(x >= 0.0);
    sums.push_back(std::accumulate(r.begin(), r.end(), 0.0));
  }
  // critical value of the KS statistic at 1%: 1.628 / sqrt(n)
  CHECK(ks_distance(sums, [](double x) { return RadialModel::gamma(4.0).cdf(x); }) <
        1.628 / std::sqrt(50000.0));

  const auto bounded = sample_dirichlet(make({1, 1}, {1, 1}, 1.0, RadialModel::beta(2, 3)), 1000, 3);
  for (const auto& r : bounded) CHECK(r[0] + r[1] <= 1.0);
}

TEST_CASE("Kotz marginals are exponential") {
  const auto s = make({1, 1}, {1, 1}, 1.0, RadialModel::gamma(2.0));
  const std::size_t n = 100000;
  const auto rows = sample_dirichlet(s, n, 2024);
  for (std::size_t i = 0; i < 2; ++i) {
    std::vector<double> xs;
    for (const auto& r : rows) xs.push_back(r[i]);
    CHECK(ks_distance(xs, [](double x) { return -std::expm1(-x); }) < 1.628 / std::sqrt(double(n)));
  }
}

TEST_CASE("component means follow alpha in the caller's order") {
  const std::vector<double> alpha = {0.5, 2.0, 1.5};
  const auto r = RadialModel::gamma(3.0, 2.0);
  const auto s = make(alpha, {0.2, 1.0, 0.5}, 2.0, r);
  const std::size_t n = 200000;
  const auto rows = sample_dirichlet(s, n, 99);
  for (std::size_t i = 0; i < 3; ++i) {
    double m1 = 0.0;
    double m2 = 0.0;
    for (const auto& row : rows) {
      m1 += row[i];
      m2 += row[i] * row[i];
    }
    m1 /= n;
    const double se = std::sqrt((m2 / n - m1 * m1) / n);
    CAPTURE(i);
    CHECK(std::abs(m1 - r.mean() * alpha[i] / 4.0) <= 3.0 * se);
  }
}

TEST_CASE("conditional estimator for a single component is exact") {
  const auto r = RadialModel::weibull_tail(1.5, 0.7);
  const auto s = make({2.5}, {3.0}, 2.0, r);
  const auto e = conditional_mc_tail(s, 300.0, 100, 5);
  CHECK(e.log_p_hat == doctest::Approx(r.log_survival(std::sqrt(100.0))).epsilon(1e-13));
  CHECK(e.stderr_ <= 1e-15 * e.p_hat);
  CHECK(e.method == Method::conditional);
  CHECK(e.n == 100);
  CHECK(e.seed == 5);
}

TEST_CASE("conditional estimator on the Kotz pair") {
  // lambda = (1, 0) keeps X_1 ~ Exp(1)
  const auto s = make({1, 1}, {1, 0}, 1.0, RadialModel::gamma(2.0));
  for (double t : {5.0, 20.0, 60.0}) {
    const auto e = conditional_mc_tail(s, t, 100000, 8);
    CAPTURE(t);
    CHECK(std::abs(e.p_hat - std::exp(-t)) <= 3.0 * e.stderr_);
    CHECK(e.stderr_ > 0.0);
  }
}

TEST_CASE("conditional estimator is exactly zero beyond the support") {
  const auto s = make({1, 1}, {1, 1}, 0.5, RadialModel::beta(2, 2));
  const auto e = conditional_mc_tail(s, std::sqrt(2.0) * 1.0001, 1000, 1);
  CHECK(e.p_hat == 0.0);
  CHECK(std::isinf(e.log_p_hat));
}

TEST_CASE("crude estimator basics") {
  const auto s = make({1, 2}, {1, 0.5}, 2.0, RadialModel::gamma(3.0));
  const auto all = crude_mc_tail(s, 0.0, 1000, 4);
  CHECK(all.p_hat == 1.0);
  const auto a = crude_mc_tail(s, 5.0, 20000, 4);
  const auto b = crude_mc_tail(s, 5.0, 20000, 4);
  CHECK(a.p_hat == b.p_hat);
  CHECK(a.method == Method::crude);
  CHECK(a.p_hat >= 0.0);
  CHECK(a.p_hat <= 1.0);
}

TEST_CASE("conditional and crude estimators agree") {
  const std::vector<AggregateSpec> specs = {
      make({1, 1}, {1, 1}, 2.0, RadialModel::gamma(2.0)),
      make({2, 1, 0.5}, {1, 0.8, 0.6}, 0.4, RadialModel::weibull_tail(2.0, 1.0)),
      make({1, 1, 1}, {1, 0.5, 0.2}, 1.0, RadialModel::gamma(3.0)),
      make({1, 2}, {1, 0}, 1.0, RadialModel::beta(1.5, 2.0)),
  };
  for (const auto& s : specs) {
    // threshold with P close to 1e-2
    double lo = 1e-6;
    double hi = 1e3;
    for (int it = 0; it < 60; ++it) {
      const double mid = std::sqrt(lo * hi);
      (conditional_mc_tail(s, mid, 4000, 77).p_hat > 1e-2 ? lo : hi) = mid;
    }
    const double t = std::sqrt(lo * hi);
    const auto c = conditional_mc_tail(s, t, 100000, 31);
    const auto k = crude_mc_tail(s, t, 200000, 32);
    CAPTURE(s.p);
    CHECK(within(c, k, 3.0));
  }
}

TEST_CASE("estimates do not depend on the worker count") {
  const auto s = make({2, 1, 0.5}, {1, 0.8, 0.6}, 0.4, RadialModel::gamma(2.0));
  ParallelConfig one{1, 4096};
  ParallelConfig four{4, 4096};
  const double t = threshold_at_depth(s, 1e-8);
  const auto c1 = conditional_mc_tail(s, t, 50000, 123, one);
  const auto c4 = conditional_mc_tail(s, t, 50000, 123, four);
  CHECK(c1.p_hat == c4.p_hat);
  CHECK(c1.log_p_hat == c4.log_p_hat);
  CHECK(c1.stderr_ == c4.stderr_);
  const auto k1 = crude_mc_tail(s, 1.0, 50000, 9, one);
  const auto k4 = crude_mc_tail(s, 1.0, 50000, 9, four);
  CHECK(k1.p_hat == k4.p_hat);
  CHECK(sample_dirichlet(s, 9000, 4, one) == sample_dirichlet(s, 9000, 4, four));
  const auto m1 = max_sum_ratio(s, {t}, 20000, 6, one);
  const auto m4 = max_sum_ratio(s, {t}, 20000, 6, four);
  CHECK(m1[0].ratio == m4[0].ratio);
  // a different seed changes the estimate
  CHECK(conditional_mc_tail(s, t, 50000, 124, one).p_hat != c1.p_hat);
}

TEST_CASE("quadrature examples") {
  const auto s = make({1, 1}, {1, 1}, 1.0, RadialModel::gamma(2.0));
  const auto e = quadrature_tail(s, 10.0);
  CHECK(e.p_hat == doctest::Approx(11.0 * std::exp(-10.0)).epsilon(1e-10));
  CHECK(e.stderr_ == 0.0);
  CHECK(e.method == Method::quadrature);
  // single component: exact survival
  const auto one = make({3}, {2}, 2.0, RadialModel::gamma(1.5));
  CHECK(quadrature_tail(one, 50.0).log_p_hat ==
        doctest::Approx(RadialModel::gamma(1.5).log_survival(5.0)).epsilon(1e-12));
  CHECK_THROWS_AS(quadrature_tail(make({1, 1, 1, 1}, {1, 1, 1, 1}, 2.0, RadialModel::gamma(4)), 3.0),
                  UnsupportedError);
}

TEST_CASE("quadrature and conditional estimates agree") {
  struct Case {
    AggregateSpec spec;
    std::vector<double> depths;
  };
  const std::vector<double> deep = {1e-2, 1e-6, 1e-10};
  // with a finite radial endpoint the rarity sits in the simplex draw, so the
  // conditional estimator only resolves moderate depths
  const std::vector<Case> cases = {
      {make({1, 1}, {1, 1}, 2.0, RadialModel::gamma(2.0)), deep},
      {make({1, 1}, {1, 0.5}, 1.0, RadialModel::gamma(2.0)), deep},
      {make({1, 1}, {1, 1}, 0.5, RadialModel::gamma(2.0)), deep},
      {make({1, 1, 1}, {1, 1, 1}, 0.5, RadialModel::gamma(3.0)), deep},
      {make({2, 1, 0.5}, {1, 0.8, 0.6}, 0.4, RadialModel::gamma(2.0)), deep},
      {make({1, 1}, {1, 0}, 1.0, RadialModel::beta(1, 1)), {1e-2, 1e-3}},
      {make({2, 0.5, 0.5}, {1, 0.5, 0.3}, 1.0, RadialModel::beta(2, 1)), {1e-2, 1e-3}},
  };
  for (const auto& c : cases) {
    for (double depth : c.depths) {
      const double t = threshold_at_depth(c.spec, depth);
      CAPTURE(c.spec.p);
      CAPTURE(c.spec.dim());
      CAPTURE(depth);
      const auto q = quadrature_tail(c.spec, t);
      const auto m = conditional_mc_tail(c.spec, t, 100000, 55);
      CHECK(std::abs(q.p_hat - m.p_hat) <= 4.0 * m.stderr_);
      CHECK(q.p_hat >= m.p_hat - 3.0 * m.stderr_);
    }
  }
}

TEST_CASE("Weibull-radial quadrature matches the double-uniform integral") {
  // X_1 = R U_1 with R, U_1 uniform: P(X_1 > 1 - u) = u + (1 - u) ln(1 - u)
  const auto s = make({1, 1}, {1, 0}, 1.0, RadialModel::beta(1, 1));
  for (double u : {0.1, 1e-2, 1e-3}) {
    const double exact = u + (1.0 - u) * std::log1p(-u);
    CHECK(quadrature_tail(s, 1.0 - u).p_hat == doctest::Approx(exact).epsilon(1e-8));
  }
}

TEST_CASE("max-to-sum ratio") {
  const auto one = make({2}, {1}, 2.0, RadialModel::gamma(2.0));
  for (const auto& row : max_sum_ratio(one, {1.0, 10.0, 100.0}, 1000, 3)) {
    CHECK(row.ratio == doctest::Approx(1.0).epsilon(1e-14));
  }
  const auto big = make({1, 1}, {1, 1}, 2.0, RadialModel::gamma(2.0));
  const auto rows = max_sum_ratio(big, {threshold_at_depth(big, 1e-8)}, 100000, 4);
  CHECK(rows[0].ratio >= 0.8);
  CHECK(rows[0].ratio <= 1.05);

  const auto kotz = make({1, 1, 1}, {1, 1, 1}, 1.0, RadialModel::gamma(3.0));
  std::vector<double> grid;
  for (double depth : {1e-6, 1e-8, 1e-10}) grid.push_back(threshold_at_depth(kotz, depth));
  const auto k = max_sum_ratio(kotz, grid, 100000, 5);
  CHECK(k[1].ratio < k[0].ratio);
  CHECK(k[2].ratio < k[1].ratio);
  CHECK(k[1].ratio <= 0.3);
}

TEST_CASE("norming constants") {
  const auto e1 = make({1}, {1}, 1.0, RadialModel::gamma(1.0));
  for (double n : {100.0, 1e4}) {
    for (auto src : {NormingSource::asymptotic, NormingSource::exact_quadrature}) {
      const auto nm = norming_constants(e1, n, src);
      CHECK(nm.b_n == doctest::Approx(std::log(n)).epsilon(1e-10));
      CHECK(nm.a_n == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  const auto e2 = make({1}, {1}, 2.0, RadialModel::gamma(1.0));
  const auto nm = norming_constants(e2, 1e4);
  CHECK(nm.b_n == doctest::Approx(std::pow(std::log(1e4), 2)).epsilon(1e-10));
  CHECK(nm.a_n == doctest::Approx(2.0 * std::log(1e4)).epsilon(1e-10));
  CHECK_THROWS_AS(norming_constants(e1, 1.0), DomainError);
  CHECK_THROWS_AS(norming_constants(make({1}, {1}, 1.0, RadialModel::beta(1, 2)), 10.0), RegimeError);
}

TEST_CASE("block maxima approach the Gumbel law") {
  const auto e1 = make({1}, {1}, 1.0, RadialModel::gamma(1.0));
  const std::size_t block = 1000;
  const auto nm = norming_constants(e1, static_cast<double>(block));
  const auto rows = gumbel_limit_check(e1, nm, block, 10000, {-1.0, 0.0, 2.0}, 12);
  for (const auto& r : rows) {
    CAPTURE(r.x);
    CHECK(std::abs(r.empirical - r.limit) <= 0.02);
  }
}

TEST_CASE("pairwise exceedance diagnostics") {
  const std::vector<std::vector<double>> identity = {{1, 0}, {0, 1}};
  const auto r = RadialModel::weibull_tail(2.0, 1.0);
  const auto rows = pairwise_asymindep({2, 2}, identity, 2.0, r, 0, 1, {1e2, 1e3, 1e4}, 100000, 7);
  REQUIRE(rows.size() == 3);
  CHECK(rows[2].ratio <= 0.05);
  CHECK(rows[2].ratio < rows[0].ratio);

  // p = 1/2: columns of unit 2-norm
  const double c = std::sqrt(0.5);
  const std::vector<std::vector<double>> w = {{0.8, c}, {0.6, c}};
  const auto half = pairwise_asymindep({1, 1}, w, 0.5, RadialModel::gamma(2.0), 0, 1, {1e2, 1e3, 1e4},
                                       100000, 8);
  CHECK(half[1].ratio < half[0].ratio);
  CHECK(half[2].ratio < half[1].ratio);

  CHECK_THROWS_AS(pairwise_asymindep({1, 1}, identity, 2.0, r, 0, 0, {1e2}, 100, 1), ValidationError);
  CHECK_THROWS_AS(pairwise_asymindep({1, 1}, {{1, 1}, {0, 1}}, 2.0, r, 0, 1, {1e2}, 100, 1), ValidationError);
  CHECK_THROWS_AS(pairwise_asymindep({1, 1}, {{0.5, c}, {0.5, c}}, 0.5, r, 0, 1, {1e2}, 100, 1),
                  ValidationError);
  CHECK_THROWS_AS(pairwise_asymindep({1, 1}, {{c, c}, {c, c}}, 0.5, r, 0, 1, {1e2}, 100, 1), ValidationError);
}

TEST_CASE("empirical Gumbel domain check") {
  const auto e1 = make({1}, {1}, 1.0, RadialModel::gamma(1.0));
  for (const auto& row : empirical_gumbel_mda(e1, {0.5, 1.0, 2.0}, {1e-4, 1e-8}, 100, 1)) {
    CHECK(row.ratio == doctest::Approx(std::exp(-row.x)).epsilon(1e-12));
  }
  const auto a = make({1, 1}, {1, 1}, 2.0, RadialModel::gamma(2.0));
  const auto rows = empirical_gumbel_mda(a, {0.5, 1.0, 2.0}, {1e-8}, 1000000, 2);
  REQUIRE(rows.size() == 3);
  CHECK(std::abs(rows[1].ratio - std::exp(-1.0)) <= 0.05);
  CHECK(rows[0].ratio > rows[1].ratio);
  CHECK(rows[1].ratio > rows[2].ratio);
  CHECK_THROWS_AS(empirical_gumbel_mda(make({1}, {1}, 1.0, RadialModel::beta(1, 1)), {1.0}, {1e-4}, 10, 1),
                  RegimeError);
}

TEST_CASE("radial laws with equivalent tails give equivalent aggregate tails") {
  // Gamma(1, r) and WeibullTail(1, r) are the same law with different samplers
  const auto g = make({1, 2}, {1, 0.5}, 2.0, RadialModel::gamma(1.0, 1.5));
  const auto w = make({1, 2}, {1, 0.5}, 2.0, RadialModel::weibull_tail(1.0, 1.5));
  const double t = threshold_at_depth(g, 1e-2);
  CHECK(within(crude_mc_tail(g, t, 200000, 1), crude_mc_tail(w, t, 200000, 2), 3.0));
  for (double depth : {1e-6, 1e-10}) {
    const double td = threshold_at_depth(g, depth);
    CHECK(conditional_mc_tail(g, td, 20000, 3).log_p_hat ==
          doctest::Approx(conditional_mc_tail(w, td, 20000, 3).log_p_hat).epsilon(1e-12));
  }
}

TEST_CASE("estimate json") {
  const auto e = conditional_mc_tail(make({1, 1}, {1, 1}, 2.0, RadialModel::gamma(2.0)), 10.0, 1000, 42);
  const std::string js = e.to_json();
  for (const char* key : {"\"method\"", "\"seed\"", "\"n\"", "\"p_hat\"", "\"log_p_hat\"", "\"stderr\""}) {
    CHECK(js.find(key) != std::string::npos);
  }
  CHECK(to_string(Method::conditional) == "conditional");
}
