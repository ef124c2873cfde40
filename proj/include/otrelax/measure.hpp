#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace otrelax {

inline constexpr double kWeightSumTolerance = 1e-9;

// Weighted point cloud in R^d. Points are stored row-major, one atom per row.
// Immutable after construction; the constructor validates normalization.
class DiscreteMeasure {
 public:
  DiscreteMeasure(std::size_t dim, std::vector<double> points, std::vector<double> weights);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }

  std::span<const double> point(std::size_t i) const {
    return {points_.data() + i * dim_, dim_};
  }
  double weight(std::size_t i) const { return weights_[i]; }

  std::span<const double> weights() const { return weights_; }
  std::span<const double> flat_points() const { return points_; }

  bool operator==(const DiscreteMeasure&) const = default;

 private:
  std::size_t dim_;
  std::vector<double> points_;
  std::vector<double> weights_;
};

// Uniform weights 1/n over the given samples, duplicates kept as separate atoms.
DiscreteMeasure empirical_from_samples(const std::vector<std::vector<double>>& samples);

struct FactorModelParams {
  std::size_t dim = 20;
  double rho = 0.0;
  std::size_t n_samples = 300;
  std::uint64_t seed = 0;
};

// n_samples draws of X with X_i = rho*R_i + sqrt(1 - rho^2)*T, where R_1..R_dim
// and T are i.i.d. standard normals and T is shared by the components of one draw.
DiscreteMeasure sample_factor_model(const FactorModelParams& params);

// n i.i.d. standard normal vectors in R^dim, as a uniform empirical measure.
DiscreteMeasure sample_standard_normal(std::size_t dim, std::size_t n, std::uint64_t seed);

// n atoms drawn with replacement from mu (probabilities = weights), uniform weights.
DiscreteMeasure resample(const DiscreteMeasure& mu, std::size_t n, std::uint64_t seed);

// CSV with header `w,x1,...,xd`, one atom per row.
DiscreteMeasure read_measure_csv(const std::string& path);
DiscreteMeasure parse_measure_csv(const std::string& text);
std::string format_measure_csv(const DiscreteMeasure& mu);
void write_measure_csv(const DiscreteMeasure& mu, const std::string& path);

}  // namespace otrelax
