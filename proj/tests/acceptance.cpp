// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "otrelax/harness.hpp"
#include "otrelax/kernels.hpp"
#include "otrelax/ot.hpp"
#include "otrelax/relaxation.hpp"
#include "otrelax/stats.hpp"

using namespace otrelax;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Line {
  int id;
  std::string title;
  Outcome outcome;
  double seconds;
  double budget;  // seconds, 0 = none
};

const CostSpec kEuclid = CostSpec::euclidean();
const CostSpec kSq = CostSpec::squared_euclidean();

double plain_ot(const DiscreteMeasure& a, const DiscreteMeasure& b, const CostSpec& cost) {
  return solve_ot(a, b, kernels::pairwise_cost(a, b, cost)).value;
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), f, a, b);
  return buf;
}

RelaxedProblem random_problem(std::mt19937_64& rng, const CostSpec& ct, const CostSpec& c) {
  std::uniform_int_distribution<std::size_t> atoms(2, 6);
  return {oracle::random_weighted_measure(rng, atoms(rng), 2),
          oracle::random_weighted_measure(rng, atoms(rng), 2), 0.0, ct, c};
}

Outcome ot_oracles() {
  std::mt19937_64 rng(1001);
  double worst_perm = 0.0, worst_lp = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 1 + t % 4;
    const std::vector<double> u(k, 1.0 / static_cast<double>(k));
    const Matrix c = oracle::random_matrix(rng, k, k);
    worst_perm = std::max(worst_perm, std::abs(solve_ot(u, u, c).value - oracle::permutation_ot(c)));
  }
  for (int t = 0; t < 100; ++t) {
    const std::size_t m = 1 + t % 3, n = 1 + (t / 3) % 3;
    const auto a = oracle::random_weights(rng, m), b = oracle::random_weights(rng, n);
    const Matrix c = oracle::random_matrix(rng, m, n);
    worst_lp = std::max(worst_lp, std::abs(solve_ot(a, b, c).value - oracle::vertex_enumeration_ot(a, b, c)));
  }
  return {worst_perm <= 1e-9 && worst_lp <= 1e-8,
          fmt("max |err| permutation %.2e, vertex LP %.2e", worst_perm, worst_lp)};
}

Outcome threshold_formula() {
  std::mt19937_64 rng(1003);
  std::uniform_real_distribution<double> frac(0.0, 2.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    auto p = random_problem(rng, kEuclid, kEuclid);
    const double g0 = plain_ot(p.mu0, p.nu, kEuclid);
    p.delta = frac(rng) * g0;
    worst = std::max(worst, std::abs(solve_relaxed_generic(p).value - std::max(g0 - p.delta, 0.0)));
  }
  return {worst <= 1e-6, fmt("max |G_delta - max(G0 - delta, 0)| = %.2e", worst)};
}

Outcome quadratic_closed_form() {
  std::mt19937_64 rng(1004);
  double worst_lambda = 0.0, worst_value = 0.0;
  for (int t = 0; t < 50; ++t) {
    auto p = random_problem(rng, kSq, kSq);
    const double h0 = plain_ot(p.mu0, p.nu, kSq);
    for (double f : {0.1, 0.5, 0.9, 2.0}) {
      p.delta = f * h0;
      const auto s = solve_relaxed_generic(p);
      const double lambda = std::max(std::sqrt(h0 / p.delta) - 1.0, 0.0);
      const double gap = std::max(std::sqrt(h0) - std::sqrt(p.delta), 0.0);
      worst_lambda = std::max(worst_lambda, std::abs(s.lambda_star - lambda));
      worst_value = std::max(worst_value, std::abs(s.value - gap * gap));
    }
  }
  return {worst_lambda <= 1e-5 && worst_value <= 1e-6,
          fmt("max |lambda err| %.2e, max |value err| %.2e", worst_lambda, worst_value)};
}

Outcome map_certificate() {
  std::mt19937_64 rng(1005);
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  double worst_budget = -INFINITY, worst_value = 0.0;
  for (int t = 0; t < 50; ++t) {
    auto p = random_problem(rng, kSq, kSq);
    p.delta = frac(rng) * plain_ot(p.mu0, p.nu, kSq);
    const auto s = solve_relaxed(p);
    const auto mu_star = pushforward(s.map_points, p.mu0.dim());
    worst_budget = std::max(worst_budget, plain_ot(p.mu0, mu_star, kSq) - p.delta);
    worst_value = std::max(worst_value, std::abs(plain_ot(mu_star, p.nu, kSq) - s.value));
  }
  return {worst_budget <= 1e-6 && worst_value <= 1e-6,
          fmt("max D_c(mu0,mu*) - delta = %.2e, max |D_ct(mu*,nu) - G_delta| = %.2e", worst_budget,
              worst_value)};
}

Outcome derivative_oracle() {
  std::mt19937_64 rng(1006);
  std::uniform_real_distribution<double> lam(0.05, 4.0);
  double worst_outside = 0.0, worst_width = 0.0;
  int unique_points = 0;
  const std::vector<std::pair<CostSpec, CostSpec>> pairs{
      {kSq, kSq}, {kEuclid, CostSpec::euclidean_power(2.0)}, {kEuclid, CostSpec::euclidean_power(3.0)}};
  for (int inst = 0; inst < 12; ++inst) {
    const auto& [ct, c] = pairs[inst % pairs.size()];
    // Uniform 4x4 so plan uniqueness can be decided by enumerating permutations.
    RelaxedProblem p{oracle::random_uniform_measure(rng, 4, 2), oracle::random_uniform_measure(rng, 4, 2),
                     0.3, ct, c};
    RelaxationSolver solver(p);
    const Matrix dist = kernels::pairwise_distance(p.mu0, p.nu);
    for (int k = 0; k < 20; ++k) {
      const double lambda = lam(rng), h = 1e-6;
      const auto ev = solver.eval_g(lambda);
      const double fd = (solver.eval_g(lambda + h).g_value - solver.eval_g(lambda - h).g_value) / (2 * h);
      worst_outside = std::max({worst_outside, ev.deriv_lo - fd, fd - ev.deriv_hi});
      Matrix value, dvalue;
      kernels::h_tables(dist, solver.kernel(), lambda, value, dvalue);
      std::vector<std::size_t> perm{0, 1, 2, 3};
      std::vector<double> scores;
      do {
        double s = 0;
        for (std::size_t i = 0; i < 4; ++i) s += value(i, perm[i]);
        scores.push_back(s / 4);
      } while (std::next_permutation(perm.begin(), perm.end()));
      std::sort(scores.rbegin(), scores.rend());
      if (scores[0] - scores[1] > 1e-9) {
        ++unique_points;
        worst_width = std::max(worst_width, ev.deriv_hi - ev.deriv_lo);
      }
    }
  }
  return {worst_outside <= 1e-5 && worst_width <= 1e-8 && unique_points > 0,
          fmt("max bracket miss %.2e; max width at unique plans %.2e", worst_outside, worst_width) +
              " over " + std::to_string(unique_points) + " unique points"};
}

Outcome convexity_monotonicity() {
  std::mt19937_64 rng(1007);
  double worst_convex = 0.0, worst_mono = 0.0, worst_above = 0.0;
  const std::vector<std::pair<CostSpec, CostSpec>> pairs{
      {kSq, kSq}, {kEuclid, kEuclid}, {kEuclid, CostSpec::euclidean_power(3.0)},
      {CostSpec::euclidean_power(3.0), CostSpec::euclidean_power(3.0)}};
  for (int inst = 0; inst < 12; ++inst) {
    const auto& [ct, c] = pairs[inst % pairs.size()];
    auto p = random_problem(rng, ct, c);
    const double g0 = plain_ot(p.mu0, p.nu, ct);
    p.delta = 0.3 * g0;
    RelaxationSolver solver(p);
    std::vector<double> g;
    for (int k = 0; k <= 32; ++k) g.push_back(solver.eval_g(0.125 * k).g_value);
    for (std::size_t k = 1; k + 1 < g.size(); ++k)
      worst_convex = std::max(worst_convex, g[k] - 0.5 * (g[k - 1] + g[k + 1]));
    double previous = INFINITY;
    for (int k = 0; k <= 8; ++k) {
      p.delta = 0.2 * k * g0;
      const double v = solve_relaxed_generic(p).value;
      if (std::isfinite(previous)) worst_mono = std::max(worst_mono, v - previous);
      worst_above = std::max(worst_above, v - g0);
      previous = v;
    }
  }
  return {worst_convex <= 1e-9 && worst_mono <= 1e-9 && worst_above <= 1e-9,
          fmt("convexity violation %.2e, monotonicity violation %.2e", worst_convex, worst_mono) +
              fmt(", max G_delta - G0 %.2e", worst_above)};
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

Outcome stats_formulas() {
  auto oracle_eps = [](std::size_t d, double zeta, bool refined) {
    const double diam = std::sqrt(static_cast<double>(d));
    const double scale = refined ? 2.0 : 4.0;
    auto f = [&](double xi) {
      const double cover = std::pow(std::ceil(diam / (2.0 * (xi / scale))) + 1.0, static_cast<double>(d));
      const double lg = std::log(2.0 * std::ceil(2.0 * diam / xi) + 1.0);
      return refined ? std::sqrt(cover * std::log(2.0) + lg) : std::sqrt(cover * lg);
    };
    return oracle::trapezoid_step_integral(f, zeta / 4.0, (refined ? 2.0 : 4.0) * diam, 20000);
  };
  double worst_rel = 0.0;
  for (auto [d, zeta] : {std::pair<std::size_t, double>{2, 0.1}, {3, 0.3}, {1, 0.05}}) {
    const auto cov = unit_cube_covering(d);
    for (bool refined : {false, true}) {
      const double ours = refined ? epsilon_integral_refined(cov, zeta) : epsilon_integral(cov, zeta);
      const double ref = oracle_eps(d, zeta, refined);
      worst_rel = std::max(worst_rel, std::abs(ours - ref) / ref);
    }
  }

  std::mt19937_64 rng(1008);
  std::uniform_int_distribution<std::size_t> dim(2, 6);
  std::uniform_real_distribution<double> logn(1.0, 6.0), rho(0.01, 0.4), zeta(0.05, 1.5), K(0.1, 10.0);
  int refined_violations = 0;
  for (int t = 0; t < 20; ++t) {
    BoundInputs in;
    in.n = static_cast<std::size_t>(std::pow(10.0, logn(rng)));
    in.rho = rho(rng);
    in.zeta = zeta(rng);
    in.K_lambda = K(rng);
    in.covering = unit_cube_covering(dim(rng));
    refined_violations += epsilon_bound_refined(in) > epsilon_bound(in);
  }

  const std::vector<double> ns{1e2, 1e3, 1e4, 1e5, 1e6};
  std::vector<double> residual, dominant;
  for (double n : ns) {
    BoundInputs in;
    in.n = static_cast<std::size_t>(n);
    in.zeta = 0.3;
    in.K_lambda = 2.0;
    in.covering = unit_cube_covering(2);
    residual.push_back(epsilon_bound(in) - 4.0 * in.zeta * in.K_lambda);
    dominant.push_back(optimized_zeta_dominant_term(in.n, 10, 2.0, unit_cube_H(10)));
  }
  const double s_fixed = loglog_slope(ns, residual), s_opt = loglog_slope(ns, dominant);
  const bool pass = worst_rel <= 1e-6 && refined_violations == 0 && std::abs(s_fixed + 0.5) <= 0.02 &&
                    std::abs(s_opt + 0.1) <= 0.02;
  return {pass, fmt("oracle rel err %.2e; refined>plain %.0f/20; ", worst_rel, refined_violations) +
                    fmt("slopes %.4f (want -0.5), %.4f (want -0.1)", s_fixed, s_opt)};
}

ExperimentConfig desk_config() {
  ExperimentConfig c = preset("desk");
  c.seed = 20240601;
  return c;
}

std::string desk_rows_csv;

Outcome desk_experiment() {
  const auto rows = run_experiment(desk_config());
  desk_rows_csv = format_rows_csv(rows);
  bool below = true;
  double worst_identity = 0.0;
  for (const auto& r : rows) {
    below = below && r.g_delta_empirical <= r.g0_empirical;
    const double gap = std::max(std::sqrt(r.g0_empirical) - std::sqrt(r.delta_n), 0.0);
    worst_identity = std::max(worst_identity, std::abs(r.g_delta_empirical - gap * gap));
  }
  const auto summary = summarize(rows);
  const auto& last = summary.back();
  const bool shift = last.g0_emp_mean > last.g0_ref_mean;
  return {below && shift && worst_identity <= 1e-9,
          std::string("(a) ") + (below ? "ok" : "violated") +
              fmt("; (b) mean g0_emp %.4f vs g0_ref %.4f", last.g0_emp_mean, last.g0_ref_mean) +
              fmt(" at n=%.0f; (c) max identity err %.2e", static_cast<double>(last.n), worst_identity)};
}

Outcome determinism() {
  if (desk_rows_csv.empty()) return {false, "criterion 9 run missing"};
  const std::string again = format_rows_csv(run_experiment(desk_config()));
  const bool same = again == desk_rows_csv;
  return {same, same ? "rows.csv identical (" + std::to_string(again.size()) + " bytes)"
                     : std::string("rows.csv differs")};
}

}  // namespace

int main() {
  reset_duality_audit();
  std::vector<Line> lines;
  auto run = [&](int id, const std::string& title, double budget, const std::function<Outcome()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget > 0 && s > budget) {
      o.pass = false;
      o.detail += fmt("; over time budget (%.0f s)", budget);
    }
    lines.push_back({id, title, o, s, budget});
  };

  run(1, "OT oracle equivalence", 10, ot_oracles);
  run(3, "threshold formula for order-1 costs", 60, threshold_formula);
  run(4, "quadratic closed form", 0, quadratic_closed_form);
  run(5, "map recovery certificate", 0, map_certificate);
  run(6, "derivative brackets", 0, derivative_oracle);
  run(7, "convexity and monotonicity", 0, convexity_monotonicity);
  run(8, "bound formulas", 0, stats_formulas);
  run(9, "desk-scale estimation experiment", 300, desk_experiment);
  run(10, "experiment determinism", 0, determinism);
  run(2, "strong duality on every solve", 0, [] {
    const auto audit = duality_audit();
    return Outcome{audit.solves > 0 && audit.max_gap <= 1e-7,
                   fmt("max |primal - dual| %.2e over %.0f solves", audit.max_gap,
                       static_cast<double>(audit.solves))};
  });

  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.id < b.id; });
  bool all = true;
  for (const auto& l : lines) {
    all = all && l.outcome.pass;
    std::printf("criterion %2d %s  %-36s %7.2fs  %s\n", l.id, l.outcome.pass ? "PASS" : "FAIL",
                l.title.c_str(), l.seconds, l.outcome.detail.c_str());
  }
  std::printf("%s\n", all ? "all criteria pass" : "some criteria FAIL");
  return all ? 0 : 1;
}
