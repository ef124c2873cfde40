#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "otrelax/matrix.hpp"
#include "otrelax/measure.hpp"

namespace otrelax {

// Row/column sums of a returned plan match the marginals to this tolerance.
inline constexpr double kFeasibilityTol = 1e-8;
// Relative reduced-cost tolerance, scaled by max(1, max |cost|).
inline constexpr double kOptimalityTol = 1e-9;
// Supply i is perturbed by this amount during pivoting to break degeneracy.
inline constexpr double kSupplyPerturbation = 1e-12;

struct TransportPlan {
  Matrix mass;                     // rows index mu atoms, columns index nu atoms
  double value = 0.0;              // sum of mass * cost (or payoff for max problems)
  std::vector<double> dual_alpha;  // row potentials
  std::vector<double> dual_beta;   // column potentials
  std::size_t iterations = 0;      // simplex pivots performed
};

struct SolverOptions {
  int threads = 1;
  std::size_t max_iterations = 0;  // 0: automatic, scales with problem size
};

// Exact minimum-cost coupling by the transportation simplex. Returns an optimal
// basic plan with potentials satisfying alpha_i + beta_j <= cost(i, j), with
// equality on every cell that carries mass.
TransportPlan solve_ot(std::span<const double> supply, std::span<const double> demand,
                       const CostMatrix& cost, const SolverOptions& options = {});
TransportPlan solve_ot(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                       const CostMatrix& cost, const SolverOptions& options = {});

// Maximum of sum mass * payoff. The potentials are those of the max problem:
// alpha_i + beta_j >= payoff(i, j), with equality on the support.
TransportPlan solve_ot_max(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           const CostMatrix& payoff, const SolverOptions& options = {});

struct PlanSetExtremes {
  double min = 0.0;     // min over optimal plans of sum mass * secondary
  double max = 0.0;     // max over optimal plans of sum mass * secondary
  TransportPlan plan;   // the payoff-optimal plan found first
};

// Range of a secondary linear functional over the face of payoff-maximizing
// plans. The face is the set of feasible plans supported on cells with zero
// reduced payoff under the optimal potentials; the secondary functional is
// then optimized over that face starting from the optimal basis.
PlanSetExtremes optimal_plan_set_extremes(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                          const CostMatrix& payoff, const CostMatrix& secondary,
                                          const SolverOptions& options = {});

// Running record of |primal - dual| over every plan returned by the solvers in
// this process. Thread-safe; used by the test suite.
struct DualityAudit {
  std::size_t solves = 0;
  double max_gap = 0.0;
};
DualityAudit duality_audit();
void reset_duality_audit();

// Sum of mass(i, j) * m(i, j).
double plan_expectation(const Matrix& mass, const Matrix& m);

}  // namespace otrelax
