#include "otrelax/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "otrelax/errors.hpp"

namespace otrelax {

namespace {

constexpr double kSimpsonRelTol = 1e-8;
constexpr int kSimpsonMaxDepth = 48;
constexpr std::size_t kMaxPieces = 20'000'000;

double log_factor(double diameter, double xi) {
  return std::log(2.0 * std::ceil(2.0 * diameter / xi) + 1.0);
}

double simpson_step(const std::function<double(double)>& f, double a, double fa, double b,
                    double fb, double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

// Adaptive Simpson on [a, b] for an integrand that is smooth inside (a, b).
// Evaluations are pulled a relative 1e-9 inside the endpoints so a step
// function is always read on the correct side of its jumps.
double adaptive_simpson(const std::function<double(double)>& raw, double a, double b) {
  const double eta = 1e-9 * (b - a);
  auto f = [&](double x) { return raw(std::clamp(x, a + eta, b - eta)); };
  const double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double tol = kSimpsonRelTol * std::max(std::abs(whole), 1e-300);
  return simpson_step(f, a, fa, b, fb, m, fm, whole, tol, kSimpsonMaxDepth);
}

// Breakpoints in (lo, hi) of xi -> ceil(2 diam / xi) and of xi -> N(xi / scale).
std::vector<double> breakpoints(const CoveringNumber& covering, double scale, double lo,
                                double hi) {
  std::vector<double> pts{lo, hi};
  const double two_d = 2.0 * covering.diameter;
  const double m_lo = std::ceil(two_d / hi);
  const double m_hi = std::floor(two_d / lo);
  if (m_hi - m_lo > static_cast<double>(kMaxPieces)) {
    throw ValidationError("chaining integral needs too many pieces; increase zeta");
  }
  for (double m = std::max(m_lo, 1.0); m <= m_hi; m += 1.0) {
    const double xi = two_d / m;
    if (xi > lo && xi < hi) pts.push_back(xi);
  }
  if (covering.jumps) {
    for (double s : covering.jumps(lo / scale, hi / scale)) {
      const double xi = s * scale;
      if (xi > lo && xi < hi) pts.push_back(xi);
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

double piecewise_integral(const CoveringNumber& covering, double scale, double lo, double hi,
                          const std::function<double(double)>& integrand) {
  if (!(hi > lo)) return 0.0;
  const auto pts = breakpoints(covering, scale, lo, hi);
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
    if (pts[p + 1] > pts[p]) total += adaptive_simpson(integrand, pts[p], pts[p + 1]);
  }
  return total;
}

void validate(const BoundInputs& in) {
  if (in.n == 0) throw ValidationError("n must be positive");
  if (!(in.rho > 0.0 && in.rho < 1.0)) throw ValidationError("rho must lie in (0, 1)");
  if (!(in.zeta > 0.0)) throw ValidationError("zeta must be positive");
  if (!(in.K_lambda >= 0.0) || !std::isfinite(in.K_lambda)) {
    throw ValidationError("K_lambda must be finite and nonnegative");
  }
  if (!(in.covering.diameter > 0.0) || !std::isfinite(in.covering.diameter)) {
    throw ValidationError("domain diameter must be finite and positive");
  }
  if (!in.covering.count) throw ValidationError("covering number function is missing");
}

double assemble(const BoundInputs& in, double integral) {
  const double n = static_cast<double>(in.n);
  return std::sqrt(std::log(1.0 / in.rho) / (2.0 * n)) + 4.0 * in.zeta * in.K_lambda +
         8.0 * std::numbers::sqrt2 * in.K_lambda / std::sqrt(n) * integral;
}

}  // namespace

double covering_unit_cube(std::size_t d, double xi) {
  if (d == 0) throw ValidationError("dimension must be positive");
  if (!(xi > 0.0)) throw ValidationError("covering radius must be positive");
  const double side = std::ceil(std::sqrt(static_cast<double>(d)) / (2.0 * xi)) + 1.0;
  return std::pow(side, static_cast<double>(d));
}

CoveringNumber unit_cube_covering(std::size_t d) {
  if (d == 0) throw ValidationError("dimension must be positive");
  CoveringNumber out;
  const double root = std::sqrt(static_cast<double>(d));
  out.diameter = root;
  out.count = [d](double xi) { return covering_unit_cube(d, xi); };
  out.jumps = [root](double lo, double hi) {
    std::vector<double> pts;
    if (!(hi > lo) || !(lo > 0.0)) return pts;
    for (double m = std::max(std::ceil(root / (2.0 * hi)), 1.0); m <= std::floor(root / (2.0 * lo));
         m += 1.0) {
      pts.push_back(root / (2.0 * m));
    }
    return pts;
  };
  return out;
}

double unit_cube_H(std::size_t d) {
  return std::pow(2.5 * std::sqrt(static_cast<double>(d)), static_cast<double>(d));
}

double epsilon_integrand(const CoveringNumber& covering, double xi) {
  return std::sqrt(covering.count(xi / 4.0) * log_factor(covering.diameter, xi));
}

double epsilon_integrand_refined(const CoveringNumber& covering, double xi) {
  return std::sqrt(covering.count(xi / 2.0) * std::numbers::ln2 +
                   log_factor(covering.diameter, xi));
}

double epsilon_integral(const CoveringNumber& covering, double zeta) {
  return piecewise_integral(covering, 4.0, zeta / 4.0, 4.0 * covering.diameter,
                            [&](double xi) { return epsilon_integrand(covering, xi); });
}

double epsilon_integral_refined(const CoveringNumber& covering, double zeta) {
  return piecewise_integral(covering, 2.0, zeta / 4.0, 2.0 * covering.diameter,
                            [&](double xi) { return epsilon_integrand_refined(covering, xi); });
}

double epsilon_bound(const BoundInputs& in) {
  validate(in);
  return assemble(in, epsilon_integral(in.covering, in.zeta));
}

double epsilon_bound_refined(const BoundInputs& in) {
  validate(in);
  return assemble(in, epsilon_integral_refined(in.covering, in.zeta));
}

double bound_lambda(double k, double delta, double lambda) {
  if (!(k >= 1.0)) throw ValidationError("metric power k must be >= 1");
  if (k == 1.0) return lambda;
  return std::pow(delta, -(k - 1.0) / k);
}

double q_term(double k, double delta, double lambda, double L_ctilde) {
  if (!(k >= 1.0)) throw ValidationError("metric power k must be >= 1");
  if (!(delta >= 0.0)) throw ValidationError("delta must be nonnegative");
  if (k == 1.0) {
    if (!(lambda > L_ctilde)) {
      throw ValidationError("k = 1 needs lambda > L(ct)");
    }
    return lambda * delta;
  }
  return (2.0 * std::pow(L_ctilde, k / (k - 1.0)) + 1.0) * std::pow(delta, 1.0 / k);
}

BoundReport confidence_radius(const BoundInputs& in, double lambda, double L_ctilde,
                              bool refined) {
  BoundReport r;
  r.epsilon = refined ? epsilon_bound_refined(in) : epsilon_bound(in);
  r.q_k = q_term(in.k, in.delta, lambda, L_ctilde);
  r.radius = r.epsilon + r.q_k;
  r.lambda_used = bound_lambda(in.k, in.delta, lambda);
  r.coverage = 1.0 - 2.0 * in.rho;
  return r;
}

namespace {

void validate_cube(std::size_t n, double rho, std::size_t d) {
  if (n == 0) throw ValidationError("n must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw ValidationError("rho must lie in (0, 1)");
  if (d <= 2) throw ValidationError("the unit-cube bound needs d > 2");
}

}  // namespace

double cube_epsilon_fixed_zeta(std::size_t n, double rho, double zeta, std::size_t d,
                               double K_lambda, double diameter, double H) {
  validate_cube(n, rho, d);
  if (!(zeta > 0.0)) throw ValidationError("zeta must be positive");
  const double nn = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  const double chain = std::pow(2.0, dd / 2.0) * std::sqrt(H * std::numbers::ln2) *
                       std::pow(zeta / 4.0, 1.0 - dd / 2.0) / (dd / 2.0 - 1.0);
  return std::sqrt(std::log(1.0 / rho) / nn) + 4.0 * zeta * K_lambda +
         8.0 * std::numbers::sqrt2 * K_lambda / std::sqrt(nn) * (chain + 10.0 * diameter);
}

double optimized_zeta_dominant_term(std::size_t n, std::size_t d, double K_lambda, double H) {
  const double dd = static_cast<double>(d);
  return 32.0 * K_lambda *
         std::pow(8.0 * std::numbers::ln2 * H / static_cast<double>(n), 1.0 / dd);
}

double optimized_zeta(std::size_t n, std::size_t d, double H) {
  return 8.0 * std::pow(8.0 * std::numbers::ln2 * H / static_cast<double>(n),
                        1.0 / static_cast<double>(d));
}

double optimized_zeta_bound(std::size_t n, double rho, std::size_t d, double K_lambda,
                            double diameter, double H) {
  validate_cube(n, rho, d);
  const double nn = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  return std::sqrt(std::log(1.0 / rho) / nn) + optimized_zeta_dominant_term(n, d, K_lambda, H) +
         8.0 * K_lambda * std::pow(8.0 * std::numbers::ln2 * H, 1.0 / dd) /
             ((dd / 2.0 - 1.0) * std::pow(nn, 1.0 / dd)) +
         80.0 * std::numbers::sqrt2 * diameter * K_lambda / std::sqrt(nn);
}

}  // namespace otrelax
