// Serial vs OpenMP timings for the data-parallel kernels and a full OT solve.
//
//   bench_kernels [atoms] [dim] [threads] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#ifdef OTRELAX_HAVE_OPENMP
#include <omp.h>
#endif

#include "otrelax/kernels.hpp"
#include "otrelax/measure.hpp"
#include "otrelax/ot.hpp"

using namespace otrelax;

namespace {

template <class F>
double time_ms(int repeats, F&& f) {
  auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < repeats; ++r) f();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / repeats;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t atoms = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 300;
  const std::size_t dim = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 20;
  int threads = argc > 3 ? std::atoi(argv[3]) : 0;
  const int repeats = argc > 4 ? std::atoi(argv[4]) : 5;
#ifdef OTRELAX_HAVE_OPENMP
  if (threads <= 0) threads = omp_get_max_threads();
#else
  if (threads <= 0) threads = 1;
#endif

  const auto mu = sample_factor_model({dim, 0.8, atoms, 1});
  const auto nu = sample_standard_normal(dim, atoms, 2);
  const auto spec = CostSpec::squared_euclidean();
  const HKernel h{HFamily::Quadratic, 2.0};

  std::printf("atoms %zu dim %zu threads %d openmp %s\n", atoms, dim, threads,
              kernels::openmp_enabled() ? "yes" : "no");
  std::printf("%-22s %12s %12s %8s\n", "kernel", "serial_ms", "parallel_ms", "match");

  Matrix cs, cp;
  const double t_cs = time_ms(repeats, [&] { cs = kernels::serial::pairwise_cost(mu, nu, spec); });
  const double t_cp =
      time_ms(repeats, [&] { cp = kernels::parallel::pairwise_cost(mu, nu, spec, threads); });
  std::printf("%-22s %12.3f %12.3f %8s\n", "pairwise_cost", t_cs, t_cp, cs == cp ? "yes" : "NO");

  const Matrix dist = kernels::serial::pairwise_distance(mu, nu);
  Matrix vs, ds, vp, dp;
  const double t_hs = time_ms(repeats, [&] { kernels::serial::h_tables(dist, h, 1.5, vs, ds); });
  const double t_hp =
      time_ms(repeats, [&] { kernels::parallel::h_tables(dist, h, 1.5, vp, dp, threads); });
  std::printf("%-22s %12.3f %12.3f %8s\n", "h_tables", t_hs, t_hp,
              (vs == vp && ds == dp) ? "yes" : "NO");

  std::vector<double> u(atoms, 0.0), v(atoms, 0.0);
  std::vector<std::uint8_t> eligible(atoms * atoms, 1);
  kernels::PricingInput in{cs.data(), u.data(), v.data(), eligible.data(), atoms, atoms, -1e300};
  kernels::Pricing ps, pp;
  const double t_ps = time_ms(repeats * 20, [&] { ps = kernels::serial::price_most_negative(in); });
  const double t_pp =
      time_ms(repeats * 20, [&] { pp = kernels::parallel::price_most_negative(in, threads); });
  std::printf("%-22s %12.3f %12.3f %8s\n", "price_most_negative", t_ps, t_pp,
              ps.cell == pp.cell ? "yes" : "NO");

  TransportPlan s_plan, p_plan;
  const double t_ss = time_ms(1, [&] { s_plan = solve_ot(mu, nu, cs, {1, 0}); });
  const double t_sp = time_ms(1, [&] { p_plan = solve_ot(mu, nu, cs, {threads, 0}); });
  std::printf("%-22s %12.3f %12.3f %8s\n", "solve_ot", t_ss, t_sp,
              s_plan.value == p_plan.value ? "yes" : "NO");
  std::printf("solve_ot value %.12g pivots %zu\n", s_plan.value, s_plan.iterations);
  return 0;
}
