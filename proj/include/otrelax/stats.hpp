#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace otrelax {

// A covering-number bound xi -> N(S, d, xi) for a set S of known diameter.
// `jumps(lo, hi)` lists the arguments in (lo, hi) where a piecewise-constant
// count changes value; leave it empty for continuous bounds.
struct CoveringNumber {
  double diameter = 1.0;
  std::function<double(double)> count;
  std::function<std::vector<double>(double, double)> jumps;
};

// (ceil(sqrt(d) / (2 xi)) + 1)^d: a grid of cubes of side 2 xi / sqrt(d)
// covers [0,1]^d with Euclidean xi-balls.
double covering_unit_cube(std::size_t d, double xi);
CoveringNumber unit_cube_covering(std::size_t d);

// H with covering_unit_cube(d, xi) <= H / xi^d for all 0 < xi <= sqrt(d).
double unit_cube_H(std::size_t d);

struct BoundInputs {
  std::size_t n = 1;
  double rho = 0.05;      // failure probability, in (0, 1)
  double zeta = 0.1;      // chaining cut-off, > 0
  double k = 1.0;         // metric power of c
  double delta = 0.0;
  double K_lambda = 1.0;  // Lipschitz constant of h in (w, y)
  CoveringNumber covering = unit_cube_covering(2);
};

struct BoundReport {
  double epsilon = 0.0;
  double q_k = 0.0;
  double radius = 0.0;
  double lambda_used = 0.0;
  double coverage = 0.0;  // 1 - 2 rho
};

// Integrand of the plain chaining integral at xi.
double epsilon_integrand(const CoveringNumber& covering, double xi);
// Integrand of the refined chaining integral at xi.
double epsilon_integrand_refined(const CoveringNumber& covering, double xi);

// The chaining integrals, by adaptive Simpson on the pieces between jump points
// of the integrand. Zero when the range is empty.
double epsilon_integral(const CoveringNumber& covering, double zeta);
double epsilon_integral_refined(const CoveringNumber& covering, double zeta);

// sqrt(log(1/rho) / 2n) + 4 zeta K + 8 sqrt(2) K / sqrt(n) * integral over
// [zeta/4, 4 diam] of sqrt(N(xi/4) log(2 ceil(2 diam / xi) + 1)).
double epsilon_bound(const BoundInputs& in);
// Same leading terms; the integral runs over [zeta/4, 2 diam] with integrand
// sqrt(N(xi/2) log 2 + log(2 ceil(2 diam / xi) + 1)).
double epsilon_bound_refined(const BoundInputs& in);

// lambda * delta for k = 1 (requires lambda > L(ct)); for k > 1,
// (2 L(ct)^(k/(k-1)) + 1) delta^(1/k) with lambda = delta^(-(k-1)/k).
double q_term(double k, double delta, double lambda, double L_ctilde);

// lambda that q_term uses: the given one for k = 1, delta^(-(k-1)/k) otherwise.
double bound_lambda(double k, double delta, double lambda);

// radius = epsilon + q_k around G_delta(mu_n, nu), at level 1 - 2 rho.
BoundReport confidence_radius(const BoundInputs& in, double lambda, double L_ctilde,
                              bool refined = false);

// Unit-cube bound for fixed zeta (d > 2):
// sqrt(log(1/rho)/n) + 4 zeta K + 8 sqrt(2) K / sqrt(n) *
//   (2^(d/2) sqrt(H log 2) (zeta/4)^(1 - d/2) / (d/2 - 1) + 10 diam).
double cube_epsilon_fixed_zeta(std::size_t n, double rho, double zeta, std::size_t d,
                               double K_lambda, double diameter, double H);

// The same bound after choosing zeta of order n^(-1/d) (d > 2).
double optimized_zeta_bound(std::size_t n, double rho, std::size_t d, double K_lambda,
                            double diameter, double H);
// The n^(-1/d) term 32 K (8 log 2 H / n)^(1/d) that dominates for large d.
double optimized_zeta_dominant_term(std::size_t n, std::size_t d, double K_lambda, double H);
// zeta = 8 (8 log 2 H / n)^(1/d), the cut-off the optimized bound corresponds to.
double optimized_zeta(std::size_t n, std::size_t d, double H);

}  // namespace otrelax
