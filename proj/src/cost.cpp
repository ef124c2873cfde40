#include "otrelax/cost.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "otrelax/errors.hpp"

namespace otrelax {

CostSpec CostSpec::euclidean_power(double k) {
  if (!(k >= 1.0) || !std::isfinite(k)) throw ValidationError("cost exponent must be >= 1");
  if (k == 2.0) return CostSpec(Kind::EuclideanPower, 2.0);
  return CostSpec(Kind::EuclideanPower, k);
}

CostSpec CostSpec::parse(const std::string& text) {
  if (text == "euclid") return euclidean();
  if (text == "sqeuclid") return squared_euclidean();
  const std::string prefix = "power:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string arg = text.substr(prefix.size());
    std::size_t used = 0;
    double k = 0.0;
    try {
      k = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != arg.size()) {
      throw ValidationError("cannot parse cost exponent in '" + text + "'");
    }
    return euclidean_power(k);
  }
  throw ValidationError("unknown cost '" + text + "' (expected euclid, sqeuclid or power:K)");
}

double CostSpec::lipschitz(double diameter) const {
  if (power_ == 1.0) return 1.0;
  if (!std::isfinite(diameter)) {
    throw ValidationError("cost " + name() + " is Lipschitz only on bounded domains");
  }
  return power_ * std::pow(diameter, power_ - 1.0);
}

std::string CostSpec::name() const {
  if (kind_ == Kind::SquaredEuclidean) return "sqeuclid";
  if (power_ == 1.0) return "euclid";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "power:%.12g", power_);
  return buf;
}

namespace {

double squared_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("point dimensions differ");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

struct SegmentSolution {
  double value;
  double dvalue;
  double t;  // distance of xstar from w along [w, y]
};

SegmentSolution solve_on_segment(const HKernel& kernel, double D, double lambda) {
  switch (kernel.family) {
    case HFamily::Quadratic: {
      const double t = D / (1.0 + lambda);
      return {-(lambda / (1.0 + lambda)) * D * D, -t * t, t};
    }
    case HFamily::Order1:
      if (lambda >= 1.0) return {-D, 0.0, 0.0};
      return {-lambda * D, -D, D};
    case HFamily::MetricPower: {
      const double k = kernel.k;
      const double interior = std::pow(lambda * k, -1.0 / (k - 1.0));
      auto objective = [&](double t) { return (D - t) + lambda * std::pow(t, k); };
      double best_t = std::clamp(interior, 0.0, D);
      double best = objective(best_t);
      for (double t : {0.0, D}) {
        const double v = objective(t);
        if (v < best) {
          best = v;
          best_t = t;
        }
      }
      return {-best, -std::pow(best_t, k), best_t};
    }
    case HFamily::SamePower: {
      const double k = kernel.k;
      const double t = D / (1.0 + std::pow(lambda, 1.0 / (k - 1.0)));
      const double value = -(std::pow(D - t, k) + lambda * std::pow(t, k));
      return {value, -std::pow(t, k), t};
    }
  }
  return {0.0, 0.0, 0.0};
}

void check_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("lambda must be finite and nonnegative");
  }
}

}  // namespace

double eval_cost(const CostSpec& spec, std::span<const double> x, std::span<const double> y) {
  const double sq = squared_distance(x, y);
  if (spec.is_squared()) return sq;
  const double d = std::sqrt(sq);
  if (spec.is_euclidean()) return d;
  return std::pow(d, spec.power());
}

std::pair<double, double> HKernel::on_distance(double distance, double lambda) const {
  auto s = solve_on_segment(*this, distance, lambda);
  return {s.value, s.dvalue};
}

HValue HKernel::operator()(std::span<const double> w, std::span<const double> y,
                           double lambda) const {
  check_lambda(lambda);
  const double D = std::sqrt(squared_distance(w, y));
  const auto s = solve_on_segment(*this, D, lambda);
  HValue out{s.value, s.dvalue, std::vector<double>(w.begin(), w.end())};
  if (D > 0.0 && s.t > 0.0) {
    if (family == HFamily::Quadratic) {
      for (std::size_t i = 0; i < w.size(); ++i) out.xstar[i] = (y[i] + lambda * w[i]) / (1.0 + lambda);
    } else {
      const double frac = s.t / D;
      for (std::size_t i = 0; i < w.size(); ++i) out.xstar[i] = w[i] + frac * (y[i] - w[i]);
    }
  }
  return out;
}

HValue h_quadratic(std::span<const double> w, std::span<const double> y, double lambda) {
  return HKernel{HFamily::Quadratic, 2.0}(w, y, lambda);
}

HValue h_order1(std::span<const double> w, std::span<const double> y, double lambda) {
  return HKernel{HFamily::Order1, 1.0}(w, y, lambda);
}

HValue h_metric_power(std::span<const double> w, std::span<const double> y, double lambda,
                      double k) {
  if (!(k > 1.0)) throw ValidationError("h_metric_power needs exponent k > 1");
  return HKernel{HFamily::MetricPower, k}(w, y, lambda);
}

HValue h_same_power(std::span<const double> w, std::span<const double> y, double lambda,
                    double k) {
  if (!(k > 1.0)) throw ValidationError("h_same_power needs exponent k > 1");
  return HKernel{HFamily::SamePower, k}(w, y, lambda);
}

std::optional<HKernel> select_h(const CostSpec& ctilde, const CostSpec& c) {
  if (ctilde.is_euclidean() && c.is_euclidean()) return HKernel{HFamily::Order1, 1.0};
  if (ctilde.is_squared() && c.is_squared()) return HKernel{HFamily::Quadratic, 2.0};
  if (ctilde.is_euclidean() && c.power() > 1.0) return HKernel{HFamily::MetricPower, c.power()};
  if (ctilde.power() == c.power()) return HKernel{HFamily::SamePower, c.power()};
  return std::nullopt;
}

double lipschitz_K(const CostSpec& c, const CostSpec& ctilde, double lambda,
                   double domain_diameter) {
  check_lambda(lambda);
  if (!(domain_diameter >= 0.0)) throw ValidationError("domain diameter must be nonnegative");
  return lambda * c.lipschitz(domain_diameter) + ctilde.lipschitz(domain_diameter);
}

}  // namespace otrelax
