#include "otrelax/ot.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <string>

#include "otrelax/errors.hpp"
#include "otrelax/kernels.hpp"

namespace otrelax {

namespace {

std::mutex audit_mutex;
DualityAudit audit_state;

void record_duality(std::span<const double> supply, std::span<const double> demand,
                    const TransportPlan& plan) {
  double dual = 0.0;
  for (std::size_t i = 0; i < supply.size(); ++i) dual += supply[i] * plan.dual_alpha[i];
  for (std::size_t j = 0; j < demand.size(); ++j) dual += demand[j] * plan.dual_beta[j];
  const double gap = std::abs(plan.value - dual);
  std::lock_guard lock(audit_mutex);
  ++audit_state.solves;
  audit_state.max_gap = std::max(audit_state.max_gap, gap);
}

// Transportation simplex on an m x n tableau. Nodes 0..m-1 are rows and
// m..m+n-1 are columns; the m+n-1 basic cells form a spanning tree.
class TransportationSimplex {
 public:
  TransportationSimplex(std::span<const double> supply, std::span<const double> demand,
                        const SolverOptions& options)
      : m_(supply.size()),
        n_(demand.size()),
        options_(options),
        supply_(supply.begin(), supply.end()),
        demand_(demand.begin(), demand.end()) {
    perturbed_supply_ = supply_;
    perturbed_demand_ = demand_;
    for (double& s : perturbed_supply_) s += kSupplyPerturbation;
    perturbed_demand_.back() += kSupplyPerturbation * static_cast<double>(m_);
    basis_pos_.assign(m_ * n_, -1);
    adj_.resize(m_ + n_);
    row_pot_.assign(m_, 0.0);
    col_pot_.assign(n_, 0.0);
    northwest_corner();
  }

  // Replace the objective. Keeps the current basis, which stays primal feasible.
  void set_cost(Matrix cost) { cost_ = std::move(cost); }

  // Forbid every nonbasic cell whose flag is zero.
  void restrict_to(std::vector<std::uint8_t> allowed) { allowed_ = std::move(allowed); }

  const Matrix& cost() const { return cost_; }

  void optimize() {
    const std::size_t cells = m_ * n_;
    std::vector<std::uint8_t> eligible(cells);
    for (std::size_t c = 0; c < cells; ++c) {
      eligible[c] = basis_pos_[c] < 0 && (allowed_.empty() || allowed_[c]);
    }
    double scale = 1.0;
    for (std::size_t c = 0; c < cells; ++c) {
      if (allowed_.empty() || allowed_[c] || basis_pos_[c] >= 0) {
        scale = std::max(scale, std::abs(cost_.data()[c]));
      }
    }
    const double threshold = kOptimalityTol * scale;
    const std::size_t limit =
        options_.max_iterations ? options_.max_iterations : 50 * cells + 10 * (m_ + n_) + 1000;

    bool bland = false;
    std::size_t degenerate_streak = 0;
    for (;;) {
      compute_potentials();
      kernels::PricingInput in{cost_.data(), row_pot_.data(), col_pot_.data(),
                               eligible.data(), m_, n_, threshold};
      const auto pick = bland ? kernels::price_first(in, options_.threads)
                              : kernels::price_most_negative(in, options_.threads);
      if (pick.cell < 0) break;
      if (iterations_ >= limit) {
        throw NumericalError("transportation simplex did not converge in " +
                             std::to_string(limit) + " pivots");
      }
      const auto entering = static_cast<std::size_t>(pick.cell);
      const std::size_t leaving = pivot(entering);
      eligible[entering] = 0;
      eligible[leaving] = allowed_.empty() || allowed_[leaving];
      ++iterations_;
      if (last_step_ <= 0.0) {
        if (++degenerate_streak > m_ + n_) bland = true;
      } else {
        degenerate_streak = 0;
      }
    }
  }

  // Plan on the unperturbed marginals: the flows of the final basis are
  // recomputed exactly from the original supplies and demands.
  TransportPlan extract() const {
    TransportPlan plan;
    plan.mass = Matrix(m_, n_);
    const auto flows = basis_flows(supply_, demand_);
    for (std::size_t p = 0; p < cells_.size(); ++p) {
      double f = flows[p];
      if (f < -kFeasibilityTol) {
        throw NumericalError("optimal basis is infeasible after removing the perturbation");
      }
      f = std::max(f, 0.0);
      plan.mass.data()[cells_[p]] = f;
    }
    plan.value = plan_expectation(plan.mass, cost_);
    plan.dual_alpha = row_pot_;
    plan.dual_beta = col_pot_;
    plan.iterations = iterations_;
    return plan;
  }

  // Reduced cost of every cell under the current potentials.
  std::vector<double> reduced_costs() const {
    std::vector<double> r(m_ * n_);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        r[i * n_ + j] = cost_(i, j) - row_pot_[i] - col_pot_[j];
    return r;
  }

  bool is_basic(std::size_t cell) const { return basis_pos_[cell] >= 0; }

 private:
  void add_basic(std::size_t cell, double flow) {
    const auto p = static_cast<int>(cells_.size());
    cells_.push_back(cell);
    flow_.push_back(flow);
    basis_pos_[cell] = p;
    adj_[cell / n_].push_back(p);
    adj_[m_ + cell % n_].push_back(p);
  }

  void northwest_corner() {
    std::vector<double> s = perturbed_supply_;
    std::vector<double> d = perturbed_demand_;
    std::size_t i = 0, j = 0;
    while (true) {
      const double q = std::min(s[i], d[j]);
      add_basic(i * n_ + j, std::max(q, 0.0));
      s[i] -= q;
      d[j] -= q;
      if (i + 1 == m_ && j + 1 == n_) break;
      if (j + 1 == n_ || (i + 1 < m_ && s[i] <= d[j])) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  void compute_potentials() {
    std::vector<std::uint8_t> seen(m_ + n_, 0);
    std::vector<std::size_t> stack{0};
    row_pot_[0] = 0.0;
    seen[0] = 1;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      for (int p : adj_[node]) {
        const std::size_t cell = cells_[static_cast<std::size_t>(p)];
        const std::size_t i = cell / n_, j = cell % n_;
        const std::size_t other = node < m_ ? m_ + j : i;
        if (seen[other]) continue;
        seen[other] = 1;
        if (other >= m_) {
          col_pot_[j] = cost_.data()[cell] - row_pot_[i];
        } else {
          row_pot_[i] = cost_.data()[cell] - col_pot_[j];
        }
        stack.push_back(other);
      }
    }
  }

  // Brings `entering` into the basis; returns the cell that left.
  std::size_t pivot(std::size_t entering) {
    const std::size_t ei = entering / n_, ej = entering % n_;
    // Tree path from row node ei to column node m_+ej.
    std::vector<int> parent_edge(m_ + n_, -1);
    std::vector<std::uint8_t> seen(m_ + n_, 0);
    std::vector<std::size_t> queue{ei};
    seen[ei] = 1;
    const std::size_t target = m_ + ej;
    for (std::size_t head = 0; head < queue.size() && !seen[target]; ++head) {
      const std::size_t node = queue[head];
      for (int p : adj_[node]) {
        const std::size_t cell = cells_[static_cast<std::size_t>(p)];
        const std::size_t other = node < m_ ? m_ + cell % n_ : cell / n_;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_edge[other] = p;
        queue.push_back(other);
      }
    }
    // Walk back from the column node; edges alternate -, +, -, ... starting
    // at the edge incident to the entering column.
    std::vector<int> path;
    for (std::size_t node = target; node != ei;) {
      const int p = parent_edge[node];
      path.push_back(p);
      const std::size_t cell = cells_[static_cast<std::size_t>(p)];
      node = node < m_ ? m_ + cell % n_ : cell / n_;
    }
    double theta = 0.0;
    int leave = -1;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const int p = path[k];
      const double f = std::max(flow_[static_cast<std::size_t>(p)], 0.0);
      const std::size_t cell = cells_[static_cast<std::size_t>(p)];
      if (leave < 0 || f < theta ||
          (f == theta && cell < cells_[static_cast<std::size_t>(leave)])) {
        theta = f;
        leave = p;
      }
    }
    for (std::size_t k = 0; k < path.size(); ++k) {
      flow_[static_cast<std::size_t>(path[k])] += (k % 2 == 0) ? -theta : theta;
    }
    last_step_ = theta;

    const auto lp = static_cast<std::size_t>(leave);
    const std::size_t leaving = cells_[lp];
    auto erase = [&](std::size_t node) {
      auto& list = adj_[node];
      list.erase(std::find(list.begin(), list.end(), leave));
    };
    erase(leaving / n_);
    erase(m_ + leaving % n_);
    basis_pos_[leaving] = -1;
    cells_[lp] = entering;
    flow_[lp] = theta;
    basis_pos_[entering] = leave;
    adj_[ei].push_back(leave);
    adj_[m_ + ej].push_back(leave);
    return leaving;
  }

  // Flows of the current basis tree for the given marginals, by leaf elimination.
  std::vector<double> basis_flows(const std::vector<double>& supply,
                                  const std::vector<double>& demand) const {
    std::vector<double> rest(m_ + n_);
    std::copy(supply.begin(), supply.end(), rest.begin());
    std::copy(demand.begin(), demand.end(), rest.begin() + static_cast<std::ptrdiff_t>(m_));
    std::vector<std::size_t> degree(m_ + n_);
    for (std::size_t v = 0; v < m_ + n_; ++v) degree[v] = adj_[v].size();
    std::vector<std::uint8_t> done(cells_.size(), 0);
    std::vector<double> flows(cells_.size(), 0.0);
    std::vector<std::size_t> leaves;
    for (std::size_t v = 0; v < m_ + n_; ++v)
      if (degree[v] == 1) leaves.push_back(v);
    while (!leaves.empty()) {
      const std::size_t v = leaves.back();
      leaves.pop_back();
      if (degree[v] != 1) continue;
      int edge = -1;
      for (int p : adj_[v])
        if (!done[static_cast<std::size_t>(p)]) edge = p;
      const auto pe = static_cast<std::size_t>(edge);
      const std::size_t cell = cells_[pe];
      const std::size_t other = v < m_ ? m_ + cell % n_ : cell / n_;
      flows[pe] = rest[v];
      rest[other] -= rest[v];
      rest[v] = 0.0;
      done[pe] = 1;
      degree[v] = 0;
      if (--degree[other] == 1) leaves.push_back(other);
    }
    return flows;
  }

  std::size_t m_, n_;
  SolverOptions options_;
  std::vector<double> supply_, demand_;
  std::vector<double> perturbed_supply_, perturbed_demand_;
  Matrix cost_;
  std::vector<std::uint8_t> allowed_;
  std::vector<std::size_t> cells_;  // basic cells, flat index
  std::vector<double> flow_;        // flows on the perturbed marginals
  std::vector<int> basis_pos_;      // cell -> position in cells_, or -1
  std::vector<std::vector<int>> adj_;
  std::vector<double> row_pot_, col_pot_;
  std::size_t iterations_ = 0;
  double last_step_ = 0.0;
};

void validate(std::span<const double> supply, std::span<const double> demand,
              const CostMatrix& cost) {
  if (supply.empty() || demand.empty()) throw ValidationError("marginals must be nonempty");
  if (cost.rows() != supply.size() || cost.cols() != demand.size()) {
    throw ValidationError("cost matrix is " + std::to_string(cost.rows()) + "x" +
                          std::to_string(cost.cols()) + " but marginals have " +
                          std::to_string(supply.size()) + " and " + std::to_string(demand.size()) +
                          " atoms");
  }
  for (double c : cost.values()) {
    if (!std::isfinite(c)) throw ValidationError("cost matrix has a non-finite entry");
  }
  double s = 0.0, d = 0.0;
  for (double x : supply) {
    if (!(x >= 0.0)) throw ValidationError("negative supply");
    s += x;
  }
  for (double x : demand) {
    if (!(x >= 0.0)) throw ValidationError("negative demand");
    d += x;
  }
  if (std::abs(s - d) > kWeightSumTolerance * std::max(1.0, s)) {
    throw ValidationError("supply and demand totals differ");
  }
}

TransportationSimplex solved(std::span<const double> supply, std::span<const double> demand,
                             const CostMatrix& cost, const SolverOptions& options) {
  validate(supply, demand, cost);
  TransportationSimplex simplex(supply, demand, options);
  simplex.set_cost(cost);
  simplex.optimize();
  return simplex;
}

}  // namespace

double plan_expectation(const Matrix& mass, const Matrix& m) {
  if (mass.rows() != m.rows() || mass.cols() != m.cols()) {
    throw ValidationError("plan and matrix shapes differ");
  }
  double total = 0.0;
  const auto& a = mass.values();
  const auto& b = m.values();
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] != 0.0) total += a[k] * b[k];
  }
  return total;
}

TransportPlan solve_ot(std::span<const double> supply, std::span<const double> demand,
                       const CostMatrix& cost, const SolverOptions& options) {
  auto plan = solved(supply, demand, cost, options).extract();
  record_duality(supply, demand, plan);
  return plan;
}

DualityAudit duality_audit() {
  std::lock_guard lock(audit_mutex);
  return audit_state;
}

void reset_duality_audit() {
  std::lock_guard lock(audit_mutex);
  audit_state = {};
}

TransportPlan solve_ot(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                       const CostMatrix& cost, const SolverOptions& options) {
  return solve_ot(mu.weights(), nu.weights(), cost, options);
}

namespace {

TransportPlan negate_plan(TransportPlan plan) {
  plan.value = -plan.value;
  for (double& a : plan.dual_alpha) a = -a;
  for (double& b : plan.dual_beta) b = -b;
  return plan;
}

}  // namespace

TransportPlan solve_ot_max(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           const CostMatrix& payoff, const SolverOptions& options) {
  return negate_plan(solve_ot(mu, nu, payoff.negated(), options));
}

PlanSetExtremes optimal_plan_set_extremes(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                          const CostMatrix& payoff, const CostMatrix& secondary,
                                          const SolverOptions& options) {
  if (secondary.rows() != payoff.rows() || secondary.cols() != payoff.cols()) {
    throw ValidationError("secondary functional has the wrong shape");
  }
  for (double c : secondary.values()) {
    if (!std::isfinite(c)) throw ValidationError("secondary functional has a non-finite entry");
  }
  TransportationSimplex primary = solved(mu.weights(), nu.weights(), payoff.negated(), options);
  PlanSetExtremes out;
  {
    auto first = primary.extract();
    record_duality(mu.weights(), nu.weights(), first);
    out.plan = negate_plan(std::move(first));
  }

  double scale = 1.0;
  for (double c : payoff.values()) scale = std::max(scale, std::abs(c));
  const double face_tol = kOptimalityTol * scale;
  const auto reduced = primary.reduced_costs();
  std::vector<std::uint8_t> face(reduced.size());
  for (std::size_t c = 0; c < reduced.size(); ++c) {
    face[c] = primary.is_basic(c) || reduced[c] <= face_tol;
  }

  auto extreme = [&](const Matrix& objective) {
    TransportationSimplex restricted = primary;
    restricted.restrict_to(face);
    restricted.set_cost(objective);
    restricted.optimize();
    const auto plan = restricted.extract();
    record_duality(mu.weights(), nu.weights(), plan);
    const double achieved = plan_expectation(plan.mass, payoff);
    if (achieved < out.plan.value - 1e-9 * scale) {
      throw NumericalError("restricted re-solve left the optimal face");
    }
    return plan_expectation(plan.mass, secondary);
  };
  out.min = extreme(secondary);
  out.max = extreme(secondary.negated());
  return out;
}

}  // namespace otrelax
