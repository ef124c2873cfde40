#pragma once

// Data-parallel inner loops. Each kernel has a serial reference implementation
// and an OpenMP implementation with identical results (reductions break ties
// by the lowest flat index, so the parallel argmin is deterministic). The
// dispatching overloads pick the OpenMP path when threads > 1.

#include <cstddef>
#include <cstdint>
#include <span>

#include "otrelax/cost.hpp"
#include "otrelax/matrix.hpp"
#include "otrelax/measure.hpp"

namespace otrelax::kernels {

// Entering-cell candidate from a pricing pass. cell < 0 means none qualified.
struct Pricing {
  std::ptrdiff_t cell = -1;
  double reduced = 0.0;
};

// Inputs of one pricing pass over an m x n transportation tableau.
struct PricingInput {
  const double* cost;           // m * n, row-major
  const double* row_potential;  // m
  const double* col_potential;  // n
  const std::uint8_t* eligible; // m * n; nonzero = nonbasic and allowed
  std::size_t rows;
  std::size_t cols;
  double threshold;             // candidates need reduced cost < -threshold
};

namespace serial {
Matrix pairwise_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostSpec& spec);
Matrix pairwise_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
void h_tables(const Matrix& distance, const HKernel& h, double lambda, Matrix& value,
              Matrix& dvalue);
// Most negative reduced cost (Dantzig's rule).
Pricing price_most_negative(const PricingInput& in);
// First qualifying cell in row-major order (Bland's rule).
Pricing price_first(const PricingInput& in);
}  // namespace serial

namespace parallel {
Matrix pairwise_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostSpec& spec,
                     int threads);
Matrix pairwise_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int threads);
void h_tables(const Matrix& distance, const HKernel& h, double lambda, Matrix& value,
              Matrix& dvalue, int threads);
Pricing price_most_negative(const PricingInput& in, int threads);
Pricing price_first(const PricingInput& in, int threads);
}  // namespace parallel

bool openmp_enabled();

Matrix pairwise_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostSpec& spec,
                     int threads = 1);
Matrix pairwise_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int threads = 1);
void h_tables(const Matrix& distance, const HKernel& h, double lambda, Matrix& value,
              Matrix& dvalue, int threads = 1);
Pricing price_most_negative(const PricingInput& in, int threads = 1);
Pricing price_first(const PricingInput& in, int threads = 1);

}  // namespace otrelax::kernels
