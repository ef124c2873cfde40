#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "otrelax/cost.hpp"
#include "otrelax/kernels.hpp"
#include "otrelax/measure.hpp"
#include "otrelax/ot.hpp"

namespace otrelax {

// min { D_ct(mu, nu) : D_c(mu0, mu) <= delta }.
struct RelaxedProblem {
  DiscreteMeasure mu0;
  DiscreteMeasure nu;
  double delta = 0.0;
  CostSpec ctilde = CostSpec::squared_euclidean();
  CostSpec c = CostSpec::squared_euclidean();
};

// g(lambda) = lambda * delta + max_pi E_pi[h(W, Y, lambda)] together with its
// one-sided derivatives delta + min/max over optimal plans of E_pi[dh/dlambda].
struct GEvaluation {
  double lambda = 0.0;
  double g_value = 0.0;
  double deriv_lo = 0.0;
  double deriv_hi = 0.0;
  TransportPlan plan;
};

struct MapPoint {
  std::size_t y_index = 0;
  std::size_t w_index = 0;
  std::vector<double> xstar;
  double mass = 0.0;
};

inline constexpr double kMapMassThreshold = 1e-12;
inline constexpr double kDefaultLambdaTol = 1e-7;
inline constexpr std::size_t kDefaultMaxIterations = 200;

struct RelaxedSolution {
  double value = 0.0;        // G_delta
  double g0 = 0.0;           // plain OT value D_ct(mu0, nu)
  double lambda_star = 0.0;  // +inf when delta == 0 (no finite multiplier)
  TransportPlan plan;        // optimal coupling of mu0 (rows) and nu (columns) under h(., ., lambda_star)
  // One-sided derivatives of g around lambda_star. For the bisection solver
  // these are taken at the ends of the final lambda bracket, so 0 lies between them.
  double g_left_deriv = 0.0;
  double g_right_deriv = 0.0;
  std::vector<MapPoint> map_points;
  std::size_t evaluations = 0;  // g evaluations spent
};

// Evaluates g and runs the lambda searches for one problem. The pairwise
// distance table is computed once and reused across lambdas.
class RelaxationSolver {
 public:
  explicit RelaxationSolver(RelaxedProblem problem, SolverOptions options = {});

  const RelaxedProblem& problem() const { return problem_; }
  const HKernel& kernel() const { return kernel_; }

  GEvaluation eval_g(double lambda) const;

  // Derivative-sign bisection on the convex function g over lambda >= 0.
  RelaxedSolution solve_generic(double tol = kDefaultLambdaTol,
                                std::size_t max_iterations = kDefaultMaxIterations) const;

  // Plain optimal transport with ct, packaged as the delta = 0 solution.
  RelaxedSolution solve_plain() const;

 private:
  RelaxedProblem problem_;
  SolverOptions options_;
  HKernel kernel_;
  Matrix distance_;
};

GEvaluation eval_g(const RelaxedProblem& problem, double lambda, const SolverOptions& options = {});

RelaxedSolution solve_relaxed_generic(const RelaxedProblem& problem, double tol = kDefaultLambdaTol,
                                      const SolverOptions& options = {});

// ct = c = Euclidean: G_delta = max(G0 - delta, 0) from a single OT solve.
RelaxedSolution solve_relaxed_order1(const RelaxedProblem& problem,
                                     const SolverOptions& options = {});

// ct = c = squared Euclidean: lambda* = (sqrt(H0/delta) - 1)^+ and
// G_delta = ((sqrt(H0) - sqrt(delta))^+)^2 from a single OT solve.
RelaxedSolution solve_relaxed_quadratic(const RelaxedProblem& problem,
                                        const SolverOptions& options = {});

enum class Method { Auto, Generic, Closed };

bool has_closed_form(const RelaxedProblem& problem);

// Auto picks the closed form when one exists. Closed throws ValidationError
// for cost pairs without one.
RelaxedSolution solve_relaxed(const RelaxedProblem& problem, Method method = Method::Auto,
                              double tol = kDefaultLambdaTol, const SolverOptions& options = {});

// (y, w, xstar, mass) for every plan cell with mass above kMapMassThreshold,
// xstar maximizing -ct(x, y) - lambda* c(x, w).
std::vector<MapPoint> recover_map(const RelaxedSolution& solution, const RelaxedProblem& problem);

// The measure carrying each map point's mass at its xstar.
DiscreteMeasure pushforward(const std::vector<MapPoint>& points, std::size_t dim);

}  // namespace otrelax
