#include "otrelax/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "otrelax/errors.hpp"

namespace otrelax {

namespace {

HKernel require_kernel(const RelaxedProblem& problem) {
  if (!(problem.delta >= 0.0) || !std::isfinite(problem.delta)) {
    throw ValidationError("delta must be finite and nonnegative");
  }
  if (problem.mu0.dim() != problem.nu.dim()) {
    throw ValidationError("mu0 and nu live in different dimensions");
  }
  auto kernel = select_h(problem.ctilde, problem.c);
  if (!kernel) {
    throw ValidationError("no closed-form inner maximizer for ct=" + problem.ctilde.name() +
                          ", c=" + problem.c.name());
  }
  return *kernel;
}

TransportPlan plain_plan(const RelaxedProblem& problem, const CostSpec& cost,
                         const SolverOptions& options) {
  return solve_ot(problem.mu0, problem.nu,
                  kernels::pairwise_cost(problem.mu0, problem.nu, cost, options.threads), options);
}

RelaxedSolution finish(RelaxedSolution s, const RelaxedProblem& problem) {
  s.map_points = recover_map(s, problem);
  return s;
}

}  // namespace

RelaxationSolver::RelaxationSolver(RelaxedProblem problem, SolverOptions options)
    : problem_(std::move(problem)),
      options_(options),
      kernel_(require_kernel(problem_)),
      distance_(kernels::pairwise_distance(problem_.mu0, problem_.nu, options.threads)) {}

GEvaluation RelaxationSolver::eval_g(double lambda) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("lambda must be finite and nonnegative");
  }
  Matrix value, dvalue;
  kernels::h_tables(distance_, kernel_, lambda, value, dvalue, options_.threads);
  auto ext = optimal_plan_set_extremes(problem_.mu0, problem_.nu, value, dvalue, options_);
  GEvaluation out;
  out.lambda = lambda;
  out.g_value = lambda * problem_.delta + ext.plan.value;
  out.deriv_lo = problem_.delta + ext.min;
  out.deriv_hi = problem_.delta + ext.max;
  if (kernel_.family == HFamily::Order1 && lambda == 1.0) {
    // Every x on [w, y] maximizes here, so dh/dlambda = -c(x, w) ranges over
    // [-d(w, y), 0]. The table above holds the x = w end; x = y gives the other.
    Matrix low(distance_.rows(), distance_.cols());
    for (std::size_t k = 0; k < distance_.values().size(); ++k) low.data()[k] = -distance_.data()[k];
    const auto lo = optimal_plan_set_extremes(problem_.mu0, problem_.nu, value, low, options_);
    out.deriv_lo = std::min(out.deriv_lo, problem_.delta + lo.min);
  }
  out.plan = std::move(ext.plan);
  return out;
}

RelaxedSolution RelaxationSolver::solve_plain() const {
  RelaxedSolution s;
  s.plan = plain_plan(problem_, problem_.ctilde, options_);
  s.g0 = s.plan.value;
  s.value = std::max(s.g0, 0.0);
  s.lambda_star = std::numeric_limits<double>::infinity();
  return finish(std::move(s), problem_);
}

RelaxedSolution RelaxationSolver::solve_generic(double tol, std::size_t max_iterations) const {
  if (!(tol > 0.0)) throw ValidationError("lambda tolerance must be positive");
  if (problem_.delta == 0.0) return solve_plain();

  std::size_t evaluations = 0;
  auto evaluate = [&](double lambda) {
    if (++evaluations > max_iterations) {
      throw NumericalError("lambda search did not converge within " +
                           std::to_string(max_iterations) + " evaluations of g");
    }
    return eval_g(lambda);
  };

  GEvaluation best = evaluate(0.0);
  auto keep_best = [&](const GEvaluation& ev) {
    if (ev.g_value < best.g_value) best = ev;
  };

  RelaxedSolution s;
  double left_deriv = best.deriv_hi;
  double right_deriv = best.deriv_hi;
  if (best.deriv_hi < 0.0) {
    // g decreases at 0: find hi with deriv_lo(hi) >= 0, then bisect [lo, hi].
    GEvaluation lo = best;
    GEvaluation hi = evaluate(1.0);
    keep_best(hi);
    bool stationary = false;
    while (hi.deriv_lo < 0.0) {
      if (hi.deriv_hi >= 0.0) {
        // 0 is already inside the bracket: hi minimizes g.
        best = hi;
        left_deriv = hi.deriv_lo;
        right_deriv = hi.deriv_hi;
        stationary = true;
        break;
      }
      lo = hi;
      hi = evaluate(hi.lambda * 2.0);
      keep_best(hi);
    }
    while (!stationary && hi.lambda - lo.lambda >= tol) {
      GEvaluation mid = evaluate(0.5 * (lo.lambda + hi.lambda));
      keep_best(mid);
      if (mid.deriv_lo > 0.0) {
        hi = std::move(mid);
      } else if (mid.deriv_hi < 0.0) {
        lo = std::move(mid);
      } else {
        best = mid;
        left_deriv = mid.deriv_lo;
        right_deriv = mid.deriv_hi;
        stationary = true;
        break;
      }
    }
    if (!stationary) {
      left_deriv = lo.deriv_hi;
      right_deriv = hi.deriv_lo;
    }
  }

  s.g0 = plain_plan(problem_, problem_.ctilde, options_).value;
  s.lambda_star = best.lambda;
  s.value = std::max(-best.g_value, 0.0);
  s.plan = std::move(best.plan);
  s.g_left_deriv = left_deriv;
  s.g_right_deriv = right_deriv;
  s.evaluations = evaluations;
  return finish(std::move(s), problem_);
}

GEvaluation eval_g(const RelaxedProblem& problem, double lambda, const SolverOptions& options) {
  return RelaxationSolver(problem, options).eval_g(lambda);
}

RelaxedSolution solve_relaxed_generic(const RelaxedProblem& problem, double tol,
                                      const SolverOptions& options) {
  return RelaxationSolver(problem, options).solve_generic(tol);
}

RelaxedSolution solve_relaxed_order1(const RelaxedProblem& problem, const SolverOptions& options) {
  if (!problem.ctilde.is_euclidean() || !problem.c.is_euclidean()) {
    throw ValidationError("threshold formula needs ct = c = Euclidean distance");
  }
  require_kernel(problem);
  RelaxedSolution s;
  s.plan = plain_plan(problem, problem.ctilde, options);
  s.g0 = s.plan.value;
  if (problem.delta == 0.0) {
    s.value = s.g0;
    s.lambda_star = std::numeric_limits<double>::infinity();
    return finish(std::move(s), problem);
  }
  // g(lambda) = lambda * (delta - G0) on [0, 1] and delta * lambda - G0 beyond.
  const double slope = problem.delta - s.g0;
  if (s.g0 > problem.delta) {
    s.value = s.g0 - problem.delta;
    s.lambda_star = 1.0;
    s.g_left_deriv = slope;
    s.g_right_deriv = problem.delta;
  } else {
    s.value = 0.0;
    s.lambda_star = 0.0;
    s.g_left_deriv = slope;
    s.g_right_deriv = slope;
  }
  // h(., ., lambda*) = -lambda* d, so the W1-optimal plan is also optimal for the payoff.
  s.plan.value = -std::min(s.lambda_star, 1.0) * s.g0;
  return finish(std::move(s), problem);
}

RelaxedSolution solve_relaxed_quadratic(const RelaxedProblem& problem,
                                        const SolverOptions& options) {
  if (!problem.ctilde.is_squared() || !problem.c.is_squared()) {
    throw ValidationError("quadratic closed form needs ct = c = squared Euclidean");
  }
  require_kernel(problem);
  RelaxedSolution s;
  s.plan = plain_plan(problem, problem.ctilde, options);
  const double h0 = s.plan.value;
  s.g0 = h0;
  const double delta = problem.delta;
  if (delta == 0.0) {
    s.value = h0;
    s.lambda_star = std::numeric_limits<double>::infinity();
    return finish(std::move(s), problem);
  }
  if (h0 > delta) {
    s.lambda_star = std::sqrt(h0 / delta) - 1.0;
    const double gap = std::sqrt(h0) - std::sqrt(delta);
    s.value = gap * gap;
  } else {
    s.lambda_star = 0.0;
    s.value = 0.0;
  }
  const double lam = s.lambda_star;
  // g'(lambda) = delta - H0 / (1 + lambda)^2, continuous.
  s.g_left_deriv = s.g_right_deriv = delta - h0 / ((1.0 + lam) * (1.0 + lam));
  s.plan.value = -(lam / (1.0 + lam)) * h0;
  return finish(std::move(s), problem);
}

bool has_closed_form(const RelaxedProblem& problem) {
  return (problem.ctilde.is_euclidean() && problem.c.is_euclidean()) ||
         (problem.ctilde.is_squared() && problem.c.is_squared());
}

RelaxedSolution solve_relaxed(const RelaxedProblem& problem, Method method, double tol,
                              const SolverOptions& options) {
  const bool closed = has_closed_form(problem);
  if (method == Method::Closed && !closed) {
    throw ValidationError("no closed form for this cost pair (ct=" + problem.ctilde.name() +
                          ", c=" + problem.c.name() + ")");
  }
  if (method == Method::Generic || !closed) return solve_relaxed_generic(problem, tol, options);
  if (problem.ctilde.is_euclidean()) return solve_relaxed_order1(problem, options);
  return solve_relaxed_quadratic(problem, options);
}

std::vector<MapPoint> recover_map(const RelaxedSolution& solution, const RelaxedProblem& problem) {
  const HKernel kernel = require_kernel(problem);
  const Matrix& mass = solution.plan.mass;
  if (mass.rows() != problem.mu0.size() || mass.cols() != problem.nu.size()) {
    throw ValidationError("solution plan does not match the problem's measures");
  }
  const bool pinned = std::isinf(solution.lambda_star);
  std::vector<MapPoint> out;
  for (std::size_t j = 0; j < mass.cols(); ++j) {
    for (std::size_t i = 0; i < mass.rows(); ++i) {
      const double m = mass(i, j);
      if (!(m > kMapMassThreshold)) continue;
      auto w = problem.mu0.point(i);
      MapPoint p;
      p.y_index = j;
      p.w_index = i;
      p.mass = m;
      if (pinned) {
        p.xstar.assign(w.begin(), w.end());
      } else {
        p.xstar = kernel(w, problem.nu.point(j), solution.lambda_star).xstar;
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

DiscreteMeasure pushforward(const std::vector<MapPoint>& points, std::size_t dim) {
  std::vector<double> coords;
  std::vector<double> weights;
  coords.reserve(points.size() * dim);
  for (const auto& p : points) {
    if (p.xstar.size() != dim) throw ValidationError("map point has the wrong dimension");
    coords.insert(coords.end(), p.xstar.begin(), p.xstar.end());
    weights.push_back(p.mass);
  }
  return DiscreteMeasure(dim, std::move(coords), std::move(weights));
}

}  // namespace otrelax
