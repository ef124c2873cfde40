#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "otrelax/errors.hpp"
#include "otrelax/harness.hpp"
#include "otrelax/kernels.hpp"
#include "otrelax/measure.hpp"
#include "otrelax/ot.hpp"
#include "otrelax/relaxation.hpp"
#include "otrelax/stats.hpp"

namespace otrelax::cli {

namespace {

std::string g12(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + path + "'");
  f << text;
  if (!f) throw ValidationError("failed writing '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ValidationError("bad list value '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError("empty value list");
  return out;
}

struct OtArgs {
  std::string mu, nu, cost = "sqeuclid", plan_out;
  int threads = 1;
};

struct OtrArgs {
  std::string mu, nu, cost = "sqeuclid", ball_cost, method = "auto", map_out;
  double delta = 0.0;
  double tol = kDefaultLambdaTol;
  int threads = 1;
};

struct BoundArgs {
  std::size_t n = 0;
  double rho = 0.05, zeta = 0.1, k = 1.0, delta = 0.0, L_ct = 1.0;
  std::size_t dim = 2;
  std::optional<double> lambda;
  bool refined = false, optimized = false;
  std::string grid, values;
};

struct ExperimentArgs {
  std::string config, preset, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

struct SampleArgs {
  std::string model = "normal", out_path;
  std::size_t dim = 2, n = 10;
  double rho = 0.5;
  std::optional<std::uint64_t> seed;
};

int run_ot(const OtArgs& a, std::ostream& out) {
  const auto mu = read_measure_csv(a.mu);
  const auto nu = read_measure_csv(a.nu);
  const auto cost = CostSpec::parse(a.cost);
  SolverOptions opts;
  opts.threads = a.threads;
  const auto plan = solve_ot(mu, nu, kernels::pairwise_cost(mu, nu, cost, a.threads), opts);
  if (!a.plan_out.empty()) {
    std::string csv = "i,j,mass\n";
    for (std::size_t i = 0; i < plan.mass.rows(); ++i)
      for (std::size_t j = 0; j < plan.mass.cols(); ++j)
        if (plan.mass(i, j) > 0.0) {
          csv += std::to_string(i) + ',' + std::to_string(j) + ',' + g17(plan.mass(i, j)) + '\n';
        }
    write_text(a.plan_out, csv);
  }
  out << "value " << g12(plan.value) << '\n';
  return kExitOk;
}

int run_otr(const OtrArgs& a, std::ostream& out) {
  Method method = Method::Auto;
  if (a.method == "generic") method = Method::Generic;
  else if (a.method == "closed") method = Method::Closed;
  else if (a.method != "auto") throw ValidationError("unknown method '" + a.method + "'");
  const auto ctilde = CostSpec::parse(a.cost);
  const auto c = a.ball_cost.empty() ? ctilde : CostSpec::parse(a.ball_cost);
  RelaxedProblem problem{read_measure_csv(a.mu), read_measure_csv(a.nu), a.delta, ctilde, c};
  SolverOptions opts;
  opts.threads = a.threads;
  const auto sol = solve_relaxed(problem, method, a.tol, opts);
  if (!a.map_out.empty()) {
    std::string csv = "y_idx,w_idx";
    for (std::size_t k = 1; k <= problem.mu0.dim(); ++k) csv += ",x" + std::to_string(k);
    csv += ",mass\n";
    for (const auto& p : sol.map_points) {
      csv += std::to_string(p.y_index) + ',' + std::to_string(p.w_index);
      for (double x : p.xstar) csv += ',' + g17(x);
      csv += ',' + g17(p.mass) + '\n';
    }
    write_text(a.map_out, csv);
  }
  out << "G_delta " << g12(sol.value) << '\n'
      << "lambda_star " << g12(sol.lambda_star) << '\n'
      << "G_0 " << g12(sol.g0) << '\n';
  return kExitOk;
}

struct BoundLine {
  BoundReport report;
  double K = 0.0;
  std::optional<double> optimized;
};

BoundLine evaluate_bound(const BoundArgs& a, std::size_t n, double delta) {
  if (a.k == 1.0 && !a.lambda) throw ValidationError("k = 1 needs --lambda (> L(ct))");
  if (a.k > 1.0 && !(delta > 0.0)) throw ValidationError("k > 1 needs --delta > 0");
  const auto covering = unit_cube_covering(a.dim);
  const double lambda = bound_lambda(a.k, delta, a.lambda.value_or(0.0));
  const auto c = CostSpec::euclidean_power(a.k);
  BoundLine line;
  line.K = lambda * c.lipschitz(covering.diameter) + a.L_ct;
  BoundInputs in{n, a.rho, a.zeta, a.k, delta, line.K, covering};
  line.report = confidence_radius(in, a.lambda.value_or(0.0), a.L_ct, a.refined);
  if (a.optimized) {
    line.optimized =
        optimized_zeta_bound(n, a.rho, a.dim, line.K, covering.diameter, unit_cube_H(a.dim));
  }
  return line;
}

int run_bound(const BoundArgs& a, std::ostream& out) {
  if (a.grid.empty()) {
    if (a.n == 0) throw ValidationError("--n is required");
    const auto line = evaluate_bound(a, a.n, a.delta);
    out << "epsilon_upper_bound " << g12(line.report.epsilon) << '\n'
        << "q_k " << g12(line.report.q_k) << '\n'
        << "radius_upper_bound " << g12(line.report.radius) << '\n'
        << "lambda " << g12(line.report.lambda_used) << '\n'
        << "K_lambda " << g12(line.K) << '\n'
        << "coverage " << g12(line.report.coverage) << '\n';
    if (line.optimized) out << "optimized_zeta_upper_bound " << g12(*line.optimized) << '\n';
    return kExitOk;
  }
  std::vector<double> values;
  if (a.grid == "n") {
    values = a.values.empty() ? std::vector<double>{1e2, 1e3, 1e4, 1e5, 1e6} : parse_list(a.values);
  } else if (a.grid == "delta") {
    if (a.n == 0) throw ValidationError("--n is required for a delta sweep");
    values = a.values.empty() ? std::vector<double>{1e-4, 1e-3, 1e-2, 1e-1, 1.0}
                              : parse_list(a.values);
  } else {
    throw ValidationError("--grid must be n or delta");
  }
  out << a.grid << ",epsilon_upper_bound,q_k,radius_upper_bound,lambda,K_lambda";
  if (a.optimized) out << ",optimized_zeta_upper_bound";
  out << '\n';
  for (double v : values) {
    std::size_t n = a.n;
    double delta = a.delta;
    if (a.grid == "n") {
      if (!(v >= 1.0) || v != std::floor(v)) throw ValidationError("n values must be integers >= 1");
      n = static_cast<std::size_t>(v);
    } else {
      delta = v;
    }
    const auto line = evaluate_bound(a, n, delta);
    out << g12(v) << ',' << g12(line.report.epsilon) << ',' << g12(line.report.q_k) << ','
        << g12(line.report.radius) << ',' << g12(line.report.lambda_used) << ',' << g12(line.K);
    if (line.optimized) out << ',' << g12(*line.optimized);
    out << '\n';
  }
  return kExitOk;
}

int run_experiment_cmd(const ExperimentArgs& a, std::ostream& out) {
  if (a.config.empty() && a.preset.empty()) {
    throw ValidationError("experiment needs --config and/or --preset");
  }
  ExperimentConfig config = preset(a.preset.empty() ? "desk" : a.preset);
  bool seeded = false;
  if (!a.config.empty()) {
    const std::string text = read_text(a.config);
    config = config_from_json(text, config);
    seeded = json_has_seed(text);
  }
  if (a.seed) {
    config.seed = *a.seed;
    seeded = true;
  }
  if (!seeded) throw ValidationError("experiment needs a seed (--seed or \"seed\" in the config)");
  if (a.threads) config.threads = *a.threads;
  config.validate();
  const auto rows = run_experiment(config);
  write_experiment_outputs(rows, a.out_dir);
  for (const auto& s : summarize(rows)) {
    out << "n " << s.n << " delta_n " << g12(s.delta_n) << " g0_emp " << g12(s.g0_emp_mean)
        << " gdelta_emp " << g12(s.gdelta_emp_mean) << " g0_ref " << g12(s.g0_ref_mean) << '\n';
  }
  return kExitOk;
}

int run_sample(const SampleArgs& a, std::ostream& out) {
  if (!a.seed) throw ValidationError("sample needs --seed");
  DiscreteMeasure mu = a.model == "normal" ? sample_standard_normal(a.dim, a.n, *a.seed)
                     : a.model == "factor"
                         ? sample_factor_model({a.dim, a.rho, a.n, *a.seed})
                         : throw ValidationError("unknown model '" + a.model + "'");
  write_measure_csv(mu, a.out_path);
  out << "atoms " << mu.size() << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal transport and its delta-relaxation: exact solvers, bounds, experiments"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  OtArgs ot;
  auto* ot_cmd = app.add_subcommand("ot", "Exact optimal transport cost between two measures");
  ot_cmd->add_option("--mu", ot.mu, "Source measure CSV (w,x1..xd)")->required();
  ot_cmd->add_option("--nu", ot.nu, "Target measure CSV")->required();
  ot_cmd->add_option("--cost", ot.cost, "euclid | sqeuclid | power:K")->capture_default_str();
  ot_cmd->add_option("--plan", ot.plan_out, "Write the plan as i,j,mass");
  ot_cmd->add_option("--threads", ot.threads, "OpenMP threads")->check(CLI::PositiveNumber);

  OtrArgs otr;
  auto* otr_cmd = app.add_subcommand("otr", "Relaxed cost G_delta over a transport ball around mu");
  otr_cmd->add_option("--mu", otr.mu, "Centre measure mu0 CSV")->required();
  otr_cmd->add_option("--nu", otr.nu, "Target measure CSV")->required();
  otr_cmd->add_option("--delta", otr.delta, "Ball radius")->required()->check(CLI::NonNegativeNumber);
  otr_cmd->add_option("--cost", otr.cost, "Transport cost: euclid | sqeuclid | power:K")
      ->capture_default_str();
  otr_cmd->add_option("--ball-cost", otr.ball_cost, "Ball cost (defaults to --cost)");
  otr_cmd->add_option("--method", otr.method, "auto | generic | closed")
      ->check(CLI::IsMember({"auto", "generic", "closed"}))
      ->capture_default_str();
  otr_cmd->add_option("--tol", otr.tol, "Lambda bracket tolerance")->check(CLI::PositiveNumber);
  otr_cmd->add_option("--map", otr.map_out, "Write y_idx,w_idx,x1..xd,mass");
  otr_cmd->add_option("--threads", otr.threads, "OpenMP threads")->check(CLI::PositiveNumber);

  BoundArgs bound;
  auto* bound_cmd = app.add_subcommand("bound", "Confidence-radius upper bounds on [0,1]^dim");
  bound_cmd->add_option("--n", bound.n, "Sample size");
  bound_cmd->add_option("--rho", bound.rho, "Failure probability")->capture_default_str();
  bound_cmd->add_option("--zeta", bound.zeta, "Chaining cut-off")->capture_default_str();
  bound_cmd->add_option("--k", bound.k, "Metric power of c")->capture_default_str();
  bound_cmd->add_option("--delta", bound.delta, "Ball radius")->capture_default_str();
  bound_cmd->add_option("--dim", bound.dim, "Dimension")->capture_default_str();
  bound_cmd->add_option("--lambda", bound.lambda, "Multiplier (k = 1 only)");
  bound_cmd->add_option("--L-ct", bound.L_ct, "Lipschitz constant of ct")->capture_default_str();
  bound_cmd->add_flag("--refined", bound.refined, "Use the tighter chaining integral");
  bound_cmd->add_flag("--optimized", bound.optimized, "Also report the optimized-zeta bound");
  bound_cmd->add_option("--grid", bound.grid, "Sweep n or delta and print CSV")
      ->check(CLI::IsMember({"n", "delta"}));
  bound_cmd->add_option("--values", bound.values, "Comma-separated sweep values");

  ExperimentArgs exp;
  auto* exp_cmd = app.add_subcommand("experiment", "Run the estimation experiment");
  exp_cmd->add_option("--config", exp.config, "JSON config (ExperimentConfig fields)");
  exp_cmd->add_option("--preset", exp.preset, "desk | paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  exp_cmd->add_option("--out", exp.out_dir, "Output directory")->required();
  exp_cmd->add_option("--seed", exp.seed, "Root seed");
  exp_cmd->add_option("--threads", exp.threads, "OpenMP threads")->check(CLI::PositiveNumber);

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "Write a sampled measure as CSV");
  sample_cmd->add_option("--model", sample.model, "normal | factor")
      ->check(CLI::IsMember({"normal", "factor"}));
  sample_cmd->add_option("--dim", sample.dim, "Dimension")->check(CLI::PositiveNumber);
  sample_cmd->add_option("--n", sample.n, "Atoms")->check(CLI::PositiveNumber);
  sample_cmd->add_option("--rho", sample.rho, "Factor-model rho");
  sample_cmd->add_option("--seed", sample.seed, "Seed");
  sample_cmd->add_option("--out", sample.out_path, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitValidation;
  }

  try {
    if (*ot_cmd) return run_ot(ot, out);
    if (*otr_cmd) return run_otr(otr, out);
    if (*bound_cmd) return run_bound(bound, out);
    if (*exp_cmd) return run_experiment_cmd(exp, out);
    if (*sample_cmd) return run_sample(sample, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitValidation;
}

}  // namespace otrelax::cli
