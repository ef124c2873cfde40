#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "otrelax/errors.hpp"
#include "otrelax/kernels.hpp"
#include "otrelax/ot.hpp"

using namespace otrelax;

namespace {

void check_plan(const TransportPlan& plan, std::span<const double> a, std::span<const double> b,
                const Matrix& cost) {
  const std::size_t m = a.size(), n = b.size();
  REQUIRE(plan.mass.rows() == m);
  REQUIRE(plan.mass.cols() == n);
  double scale = 1.0;
  for (double c : cost.values()) scale = std::max(scale, std::abs(c));
  for (std::size_t i = 0; i < m; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(plan.mass(i, j) >= 0.0);
      row += plan.mass(i, j);
      const double reduced = cost(i, j) - plan.dual_alpha[i] - plan.dual_beta[j];
      CHECK(reduced >= -1e-8 * scale);
      if (plan.mass(i, j) > 1e-10) CHECK(std::abs(reduced) <= 1e-8 * scale);
    }
    CHECK(std::abs(row - a[i]) <= kFeasibilityTol);
  }
  for (std::size_t j = 0; j < n; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < m; ++i) col += plan.mass(i, j);
    CHECK(std::abs(col - b[j]) <= kFeasibilityTol);
  }
  double dual = 0.0;
  for (std::size_t i = 0; i < m; ++i) dual += a[i] * plan.dual_alpha[i];
  for (std::size_t j = 0; j < n; ++j) dual += b[j] * plan.dual_beta[j];
  CHECK(std::abs(plan.value - dual) <= 1e-7);
  CHECK(plan.value == doctest::Approx(plan_expectation(plan.mass, cost)).epsilon(1e-12));
}

DiscreteMeasure point(double x) { return DiscreteMeasure(1, {x}, {1.0}); }

}  // namespace

TEST_CASE("solve_ot examples") {
  Matrix zero(1, 1);
  auto p = solve_ot(point(0.0), point(0.0), zero);
  CHECK(p.value == 0.0);

  const auto a = point(0.0), b = point(1.0);
  auto q = solve_ot(a, b, kernels::pairwise_cost(a, b, CostSpec::squared_euclidean()));
  CHECK(q.value == doctest::Approx(1.0));
  CHECK(q.mass(0, 0) == doctest::Approx(1.0));

  std::mt19937_64 rng(1);
  const std::vector<double> u3(3, 1.0 / 3);
  for (int t = 0; t < 20; ++t) {
    const Matrix c = oracle::random_matrix(rng, 3, 3);
    auto plan = solve_ot(u3, u3, c);
    check_plan(plan, u3, u3, c);
    CHECK(std::abs(plan.value - oracle::permutation_ot(c)) <= 1e-9);
  }
}

TEST_CASE("solve_ot against the permutation oracle") {
  std::mt19937_64 rng(100);
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 1 + t % 4;
    const std::vector<double> u(k, 1.0 / static_cast<double>(k));
    const Matrix c = oracle::random_matrix(rng, k, k, -2.0, 3.0);
    auto plan = solve_ot(u, u, c);
    check_plan(plan, u, u, c);
    CHECK(std::abs(plan.value - oracle::permutation_ot(c)) <= 1e-9);
  }
}

TEST_CASE("solve_ot against vertex enumeration") {
  std::mt19937_64 rng(200);
  for (int t = 0; t < 100; ++t) {
    const std::size_t m = 1 + t % 3, n = 1 + (t / 3) % 3;
    const auto a = oracle::random_weights(rng, m), b = oracle::random_weights(rng, n);
    const Matrix c = oracle::random_matrix(rng, m, n);
    auto plan = solve_ot(a, b, c);
    check_plan(plan, a, b, c);
    CHECK(std::abs(plan.value - oracle::vertex_enumeration_ot(a, b, c, +1)) <= 1e-8);
    auto neg = solve_ot(a, b, c.negated());
    CHECK(std::abs(-neg.value - oracle::vertex_enumeration_ot(a, b, c, -1)) <= 1e-8);
  }
}

TEST_CASE("structured and degenerate instances") {
  std::mt19937_64 rng(300);
  SUBCASE("integer costs with many ties") {
    std::uniform_int_distribution<int> coin(0, 2);
    for (int t = 0; t < 50; ++t) {
      const std::size_t k = 2 + t % 6;
      const std::vector<double> u(k, 1.0 / static_cast<double>(k));
      Matrix c(k, k);
      for (std::size_t e = 0; e < k * k; ++e) c.data()[e] = coin(rng);
      auto plan = solve_ot(u, u, c);
      check_plan(plan, u, u, c);
      if (k <= 6) CHECK(std::abs(plan.value - oracle::permutation_ot(c)) <= 1e-9);
    }
  }
  SUBCASE("all-equal costs") {
    const std::vector<double> a{0.2, 0.3, 0.5}, b{0.5, 0.5};
    const Matrix c(3, 2, 7.0);
    auto plan = solve_ot(a, b, c);
    check_plan(plan, a, b, c);
    CHECK(plan.value == doctest::Approx(7.0));
  }
  SUBCASE("zero-weight atoms") {
    const std::vector<double> a{0.0, 0.6, 0.4}, b{0.5, 0.0, 0.5};
    const Matrix c = oracle::random_matrix(rng, 3, 3);
    auto plan = solve_ot(a, b, c);
    check_plan(plan, a, b, c);
    CHECK(std::abs(plan.value - oracle::vertex_enumeration_ot(a, b, c)) <= 1e-8);
  }
  SUBCASE("rectangular larger problems satisfy optimality conditions") {
    for (int t = 0; t < 10; ++t) {
      const std::size_t m = 10 + 7 * t, n = 60 - 4 * t;
      const auto a = oracle::random_weights(rng, m), b = oracle::random_weights(rng, n);
      const Matrix c = oracle::random_matrix(rng, m, n);
      check_plan(solve_ot(a, b, c), a, b, c);
    }
  }
}

TEST_CASE("threaded pricing gives the same plan") {
  std::mt19937_64 rng(400);
  const auto mu = oracle::random_weighted_measure(rng, 40, 3);
  const auto nu = oracle::random_weighted_measure(rng, 30, 3);
  const Matrix c = kernels::pairwise_cost(mu, nu, CostSpec::squared_euclidean());
  auto s = solve_ot(mu, nu, c, {1, 0});
  auto p = solve_ot(mu, nu, c, {3, 0});
  CHECK(s.mass == p.mass);
  CHECK(s.value == p.value);
}

TEST_CASE("OT metamorphic properties") {
  std::mt19937_64 rng(500);
  for (int t = 0; t < 30; ++t) {
    const std::size_t m = 2 + t % 5, n = 2 + (t / 2) % 6;
    const auto mu = oracle::random_weighted_measure(rng, m, 2);
    const auto nu = oracle::random_weighted_measure(rng, n, 2);
    const Matrix c = kernels::pairwise_cost(mu, nu, CostSpec::euclidean());
    const double v = solve_ot(mu, nu, c).value;

    // Symmetry of a symmetric ground cost.
    const double vt = solve_ot(nu, mu, c.transposed()).value;
    CHECK(v == doctest::Approx(vt).epsilon(1e-9));

    // Adding f(i) + g(j) to the cost shifts the value by E_mu f + E_nu g.
    std::uniform_real_distribution<double> shift(-1.0, 1.0);
    std::vector<double> f(m), g(n);
    for (double& x : f) x = shift(rng);
    for (double& x : g) x = shift(rng);
    Matrix shifted = c;
    double expected = v;
    for (std::size_t i = 0; i < m; ++i) expected += mu.weight(i) * f[i];
    for (std::size_t j = 0; j < n; ++j) expected += nu.weight(j) * g[j];
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) shifted(i, j) += f[i] + g[j];
    CHECK(solve_ot(mu, nu, shifted).value == doctest::Approx(expected).epsilon(1e-9));

    // Positive scaling.
    Matrix scaled = c;
    for (std::size_t e = 0; e < m * n; ++e) scaled.data()[e] *= 3.5;
    CHECK(solve_ot(mu, nu, scaled).value == doctest::Approx(3.5 * v).epsilon(1e-9));

    // Triangle inequality for the Euclidean cost.
    const auto rho = oracle::random_weighted_measure(rng, 3, 2);
    const double mr = solve_ot(mu, rho, kernels::pairwise_cost(mu, rho, CostSpec::euclidean())).value;
    const double rn = solve_ot(rho, nu, kernels::pairwise_cost(rho, nu, CostSpec::euclidean())).value;
    CHECK(v <= mr + rn + 1e-9);
  }
}

TEST_CASE("solve_ot_max") {
  const std::vector<double> pts{0.0, 1.0};
  const DiscreteMeasure u(1, pts, {0.5, 0.5});
  Matrix zero(2, 2);
  CHECK(solve_ot_max(u, u, zero).value == 0.0);

  Matrix eye(2, 2);
  eye(0, 0) = eye(1, 1) = 1.0;
  auto best = solve_ot_max(u, u, eye);
  CHECK(best.value == doctest::Approx(1.0));
  // 2x2 oracle: the couplings form a segment; the payoff is linear along it.
  const auto [lo, hi] = oracle::two_by_two_range(0.5, 0.5);
  const double oracle_best = std::max(plan_expectation(oracle::two_by_two_plan(0.5, 0.5, lo), eye),
                                      plan_expectation(oracle::two_by_two_plan(0.5, 0.5, hi), eye));
  CHECK(best.value == doctest::Approx(oracle_best));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(best.dual_alpha[i] + best.dual_beta[j] >= eye(i, j) - 1e-9);

  std::mt19937_64 rng(600);
  for (int t = 0; t < 20; ++t) {
    const auto mu = oracle::random_weighted_measure(rng, 4, 2);
    const auto nu = oracle::random_weighted_measure(rng, 3, 2);
    const Matrix c = kernels::pairwise_cost(mu, nu, CostSpec::squared_euclidean());
    CHECK(solve_ot_max(mu, nu, c.negated()).value ==
          doctest::Approx(-solve_ot(mu, nu, c).value).epsilon(1e-12));
  }
}

TEST_CASE("optimal_plan_set_extremes") {
  std::mt19937_64 rng(700);
  SUBCASE("unique optimum collapses the range") {
    for (int t = 0; t < 20; ++t) {
      const auto mu = oracle::random_weighted_measure(rng, 4, 2);
      const auto nu = oracle::random_weighted_measure(rng, 5, 2);
      const Matrix payoff = oracle::random_matrix(rng, 4, 5);
      const Matrix secondary = oracle::random_matrix(rng, 4, 5, -1.0, 1.0);
      const auto ext = optimal_plan_set_extremes(mu, nu, payoff, secondary);
      const double at_plan = plan_expectation(ext.plan.mass, secondary);
      CHECK(ext.min == doctest::Approx(at_plan).epsilon(1e-9));
      CHECK(ext.max == doctest::Approx(at_plan).epsilon(1e-9));
    }
  }
  SUBCASE("zero payoff spans the whole polytope") {
    for (int t = 0; t < 30; ++t) {
      const std::size_t m = 1 + t % 3, n = 1 + (t / 3) % 3;
      const auto a = oracle::random_weights(rng, m), b = oracle::random_weights(rng, n);
      std::vector<double> pa(m), pb(n);
      const DiscreteMeasure mu(1, pa, a), nu(1, pb, b);
      const Matrix secondary = oracle::random_matrix(rng, m, n, -1.0, 1.0);
      const auto ext = optimal_plan_set_extremes(mu, nu, Matrix(m, n), secondary);
      CHECK(ext.min == doctest::Approx(oracle::vertex_enumeration_ot(a, b, secondary, +1)).epsilon(1e-9));
      CHECK(ext.max == doctest::Approx(oracle::vertex_enumeration_ot(a, b, secondary, -1)).epsilon(1e-9));
    }
  }
  SUBCASE("2x2 tie between two vertices") {
    // Payoff equal on both diagonals: every coupling is optimal. The secondary
    // rewards the main diagonal, so its range is the full segment.
    const DiscreteMeasure mu(1, {0.0, 1.0}, {0.4, 0.6});
    const DiscreteMeasure nu(1, {0.0, 1.0}, {0.3, 0.7});
    Matrix payoff(2, 2);
    payoff(0, 0) = 1.0;
    payoff(1, 1) = 2.0;
    payoff(0, 1) = 1.0;
    payoff(1, 0) = 2.0;  // payoff(i, j) = i + 1: row-only, so ties everywhere
    Matrix secondary(2, 2);
    secondary(0, 0) = secondary(1, 1) = 1.0;
    const auto ext = optimal_plan_set_extremes(mu, nu, payoff, secondary);
    const auto [lo, hi] = oracle::two_by_two_range(0.4, 0.3);
    const double at_lo = plan_expectation(oracle::two_by_two_plan(0.4, 0.3, lo), secondary);
    const double at_hi = plan_expectation(oracle::two_by_two_plan(0.4, 0.3, hi), secondary);
    CHECK(ext.min < ext.max);
    CHECK(ext.min == doctest::Approx(std::min(at_lo, at_hi)));
    CHECK(ext.max == doctest::Approx(std::max(at_lo, at_hi)));
  }
  SUBCASE("partial face: ties only among some cells") {
    // 3x3 uniform, payoff from a matrix where two permutations tie for best.
    const std::vector<double> pts{0.0, 1.0, 2.0};
    const DiscreteMeasure u(1, pts, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    Matrix payoff(3, 3);
    // identity and the (0 1) swap both score 3; everything else less.
    payoff(0, 0) = 1.0; payoff(1, 1) = 1.0; payoff(2, 2) = 1.0;
    payoff(0, 1) = 1.0; payoff(1, 0) = 1.0;
    Matrix secondary(3, 3);
    secondary(0, 1) = 1.0;
    const auto ext = optimal_plan_set_extremes(u, u, payoff, secondary);
    CHECK(ext.min == doctest::Approx(0.0).epsilon(1e-12).scale(1));
    CHECK(ext.max == doctest::Approx(1.0 / 3));
  }
}

TEST_CASE("solver input validation") {
  const std::vector<double> a{0.5, 0.5}, b{1.0};
  CHECK_THROWS_AS(solve_ot(a, b, Matrix(2, 2)), ValidationError);
  CHECK_THROWS_AS(solve_ot(a, std::vector<double>{0.7}, Matrix(2, 1)), ValidationError);
  Matrix bad(2, 1);
  bad(0, 0) = NAN;
  CHECK_THROWS_AS(solve_ot(a, b, bad), ValidationError);
}

TEST_CASE("duality audit covers every solve") {
  reset_duality_audit();
  std::mt19937_64 rng(800);
  for (int t = 0; t < 5; ++t) {
    const auto a = oracle::random_weights(rng, 6), b = oracle::random_weights(rng, 4);
    solve_ot(a, b, oracle::random_matrix(rng, 6, 4));
  }
  const auto audit = duality_audit();
  CHECK(audit.solves == 5);
  CHECK(audit.max_gap <= 1e-7);
}
