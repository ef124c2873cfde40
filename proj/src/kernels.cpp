#include "otrelax/kernels.hpp"

#include <cmath>

#include "otrelax/errors.hpp"

#ifdef OTRELAX_HAVE_OPENMP
#include <omp.h>
#endif

namespace otrelax::kernels {

namespace {

void check_dims(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != nu.dim()) throw ValidationError("measures live in different dimensions");
}

void prepare_tables(const Matrix& distance, Matrix& value, Matrix& dvalue) {
  if (value.rows() != distance.rows() || value.cols() != distance.cols()) {
    value = Matrix(distance.rows(), distance.cols());
  }
  if (dvalue.rows() != distance.rows() || dvalue.cols() != distance.cols()) {
    dvalue = Matrix(distance.rows(), distance.cols());
  }
}

inline bool better(double r, std::ptrdiff_t idx, const Pricing& best) {
  return best.cell < 0 || r < best.reduced || (r == best.reduced && idx < best.cell);
}

}  // namespace

// --- serial reference ---------------------------------------------------------

namespace serial {

Matrix pairwise_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostSpec& spec) {
  check_dims(mu, nu);
  Matrix out(mu.size(), nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j) out(i, j) = eval_cost(spec, mu.point(i), nu.point(j));
  return out;
}

Matrix pairwise_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return pairwise_cost(mu, nu, CostSpec::euclidean());
}

void h_tables(const Matrix& distance, const HKernel& h, double lambda, Matrix& value,
              Matrix& dvalue) {
  prepare_tables(distance, value, dvalue);
  for (std::size_t i = 0; i < distance.rows(); ++i) {
    for (std::size_t j = 0; j < distance.cols(); ++j) {
      auto [v, dv] = h.on_distance(distance(i, j), lambda);
      value(i, j) = v;
      dvalue(i, j) = dv;
    }
  }
}

Pricing price_most_negative(const PricingInput& in) {
  Pricing best;
  best.reduced = -in.threshold;
  for (std::size_t i = 0; i < in.rows; ++i) {
    const std::size_t base = i * in.cols;
    for (std::size_t j = 0; j < in.cols; ++j) {
      if (!in.eligible[base + j]) continue;
      const double r = in.cost[base + j] - in.row_potential[i] - in.col_potential[j];
      if (r < best.reduced) {
        best.reduced = r;
        best.cell = static_cast<std::ptrdiff_t>(base + j);
      }
    }
  }
  if (best.cell < 0) best.reduced = 0.0;
  return best;
}

Pricing price_first(const PricingInput& in) {
  for (std::size_t i = 0; i < in.rows; ++i) {
    const std::size_t base = i * in.cols;
    for (std::size_t j = 0; j < in.cols; ++j) {
      if (!in.eligible[base + j]) continue;
      const double r = in.cost[base + j] - in.row_potential[i] - in.col_potential[j];
      if (r < -in.threshold) return {static_cast<std::ptrdiff_t>(base + j), r};
    }
  }
  return {};
}

}  // namespace serial

// --- OpenMP -------------------------------------------------------------------

namespace parallel {

Matrix pairwise_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostSpec& spec,
                     int threads) {
  check_dims(mu, nu);
  Matrix out(mu.size(), nu.size());
  const auto rows = static_cast<std::ptrdiff_t>(mu.size());
#pragma omp parallel for num_threads(threads) schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    for (std::size_t j = 0; j < nu.size(); ++j) out(ui, j) = eval_cost(spec, mu.point(ui), nu.point(j));
  }
  return out;
}

Matrix pairwise_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int threads) {
  return pairwise_cost(mu, nu, CostSpec::euclidean(), threads);
}

void h_tables(const Matrix& distance, const HKernel& h, double lambda, Matrix& value,
              Matrix& dvalue, int threads) {
  prepare_tables(distance, value, dvalue);
  const auto rows = static_cast<std::ptrdiff_t>(distance.rows());
#pragma omp parallel for num_threads(threads) schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    for (std::size_t j = 0; j < distance.cols(); ++j) {
      auto [v, dv] = h.on_distance(distance(ui, j), lambda);
      value(ui, j) = v;
      dvalue(ui, j) = dv;
    }
  }
}

Pricing price_most_negative(const PricingInput& in, int threads) {
  Pricing best;
  const auto rows = static_cast<std::ptrdiff_t>(in.rows);
#pragma omp parallel num_threads(threads)
  {
    Pricing local;
    local.reduced = -in.threshold;
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
      const std::size_t base = static_cast<std::size_t>(i) * in.cols;
      for (std::size_t j = 0; j < in.cols; ++j) {
        if (!in.eligible[base + j]) continue;
        const double r = in.cost[base + j] - in.row_potential[i] - in.col_potential[j];
        if (r < local.reduced) {
          local.reduced = r;
          local.cell = static_cast<std::ptrdiff_t>(base + j);
        }
      }
    }
#pragma omp critical(otrelax_pricing)
    {
      if (local.cell >= 0 && better(local.reduced, local.cell, best)) best = local;
    }
  }
  if (best.cell < 0) best.reduced = 0.0;
  return best;
}

Pricing price_first(const PricingInput& in, int threads) {
  Pricing best;
  const auto rows = static_cast<std::ptrdiff_t>(in.rows);
#pragma omp parallel num_threads(threads)
  {
    Pricing local;
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
      if (local.cell >= 0) continue;
      const std::size_t base = static_cast<std::size_t>(i) * in.cols;
      for (std::size_t j = 0; j < in.cols; ++j) {
        if (!in.eligible[base + j]) continue;
        const double r = in.cost[base + j] - in.row_potential[i] - in.col_potential[j];
        if (r < -in.threshold) {
          local = {static_cast<std::ptrdiff_t>(base + j), r};
          break;
        }
      }
    }
#pragma omp critical(otrelax_pricing_first)
    {
      if (local.cell >= 0 && (best.cell < 0 || local.cell < best.cell)) best = local;
    }
  }
  return best;
}

}  // namespace parallel

// --- dispatch -----------------------------------------------------------------

bool openmp_enabled() {
#ifdef OTRELAX_HAVE_OPENMP
  return true;
#else
  return false;
#endif
}

Matrix pairwise_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostSpec& spec,
                     int threads) {
  return threads > 1 ? parallel::pairwise_cost(mu, nu, spec, threads)
                     : serial::pairwise_cost(mu, nu, spec);
}

Matrix pairwise_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int threads) {
  return threads > 1 ? parallel::pairwise_distance(mu, nu, threads)
                     : serial::pairwise_distance(mu, nu);
}

void h_tables(const Matrix& distance, const HKernel& h, double lambda, Matrix& value,
              Matrix& dvalue, int threads) {
  if (threads > 1) {
    parallel::h_tables(distance, h, lambda, value, dvalue, threads);
  } else {
    serial::h_tables(distance, h, lambda, value, dvalue);
  }
}

Pricing price_most_negative(const PricingInput& in, int threads) {
  return threads > 1 ? parallel::price_most_negative(in, threads) : serial::price_most_negative(in);
}

Pricing price_first(const PricingInput& in, int threads) {
  return threads > 1 ? parallel::price_first(in, threads) : serial::price_first(in);
}

}  // namespace otrelax::kernels
