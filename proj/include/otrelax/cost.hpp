#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace otrelax {

// Ground cost ||x - y||^k on R^d. SquaredEuclidean is the k = 2 member spelled
// out separately; the two evaluate identically.
class CostSpec {
 public:
  enum class Kind { EuclideanPower, SquaredEuclidean };

  static CostSpec euclidean() { return CostSpec(Kind::EuclideanPower, 1.0); }
  static CostSpec squared_euclidean() { return CostSpec(Kind::SquaredEuclidean, 2.0); }
  static CostSpec euclidean_power(double k);

  // "euclid", "sqeuclid" or "power:K".
  static CostSpec parse(const std::string& text);

  Kind kind() const { return kind_; }
  double power() const { return power_; }
  bool is_euclidean() const { return power_ == 1.0; }
  bool is_squared() const { return power_ == 2.0; }

  // Lipschitz constant of ||x - y||^k in each argument on a set of the given
  // diameter: k * diameter^(k-1). Throws when k > 1 and the diameter is infinite.
  double lipschitz(double diameter) const;

  std::string name() const;

 private:
  CostSpec(Kind kind, double power) : kind_(kind), power_(power) {}
  Kind kind_;
  double power_;
};

double eval_cost(const CostSpec& spec, std::span<const double> x, std::span<const double> y);

// Result of the inner problem h(w, y, lambda) = sup_x { -ct(x, y) - lambda * c(x, w) }.
struct HValue {
  double value = 0.0;
  double dvalue_dlambda = 0.0;  // -c(xstar, w)
  std::vector<double> xstar;
};

// ct = c = squared Euclidean.
HValue h_quadratic(std::span<const double> w, std::span<const double> y, double lambda);
// ct = c = Euclidean distance. At lambda == 1 the maximizer is taken to be w.
HValue h_order1(std::span<const double> w, std::span<const double> y, double lambda);
// ct = Euclidean distance, c = distance^k with k > 1.
HValue h_metric_power(std::span<const double> w, std::span<const double> y, double lambda,
                      double k);
// ct = c = distance^k with k > 1.
HValue h_same_power(std::span<const double> w, std::span<const double> y, double lambda,
                    double k);

// The (ct, c) pairs for which the inner sup has a closed form.
enum class HFamily { Order1, Quadratic, MetricPower, SamePower };

struct HKernel {
  HFamily family;
  double k = 1.0;  // exponent of c for MetricPower / SamePower

  HValue operator()(std::span<const double> w, std::span<const double> y, double lambda) const;
  // Scalar fast path on the distance D = ||w - y||: returns {value, dvalue_dlambda}.
  std::pair<double, double> on_distance(double distance, double lambda) const;
};

std::optional<HKernel> select_h(const CostSpec& ctilde, const CostSpec& c);

// K_lambda = lambda * L(c) + L(ct): a Lipschitz constant of h in (w, y).
double lipschitz_K(const CostSpec& c, const CostSpec& ctilde, double lambda,
                   double domain_diameter);

}  // namespace otrelax
