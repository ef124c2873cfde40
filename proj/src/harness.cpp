#include "otrelax/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "otrelax/errors.hpp"
#include "otrelax/measure.hpp"
#include "otrelax/relaxation.hpp"
#include "otrelax/rng.hpp"

namespace otrelax {

namespace {

enum Role : std::uint64_t { kRoleNu = 1, kRoleMu0 = 2, kRoleResample = 3 };

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ValidationError("failed writing '" + path.string() + "'");
}

std::vector<ExperimentRow> run_replication(const ExperimentConfig& config, std::size_t rep) {
  const DiscreteMeasure nu = sample_standard_normal(
      config.dim, config.base_samples, derive_seed(config.seed, {rep, kRoleNu}));
  const DiscreteMeasure mu0 = sample_factor_model(
      {config.dim, config.rho, config.base_samples, derive_seed(config.seed, {rep, kRoleMu0})});

  RelaxedProblem reference{mu0, nu, 0.0, config.cost, config.cost};
  const double g0_ref = solve_relaxed(reference).g0;

  std::vector<ExperimentRow> rows;
  for (std::size_t n : config.n_grid) {
    DiscreteMeasure mu_n =
        config.resample ? resample(mu0, n, derive_seed(config.seed, {rep, kRoleResample, n})) : mu0;
    const double delta_n = std::pow(static_cast<double>(n), -config.delta_exponent);
    RelaxedProblem problem{std::move(mu_n), nu, delta_n, config.cost, config.cost};
    const auto solution = solve_relaxed(problem);
    rows.push_back({n, rep, delta_n, solution.g0, solution.value, g0_ref});
  }
  return rows;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (dim == 0) throw ValidationError("dim must be positive");
  if (base_samples == 0) throw ValidationError("base_samples must be positive");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ValidationError("rho must lie in [0, 1]");
  if (n_grid.empty()) throw ValidationError("n_grid must be nonempty");
  for (std::size_t k = 0; k < n_grid.size(); ++k) {
    if (n_grid[k] == 0) throw ValidationError("n_grid entries must be positive");
    if (k > 0 && n_grid[k] <= n_grid[k - 1]) throw ValidationError("n_grid must be ascending");
  }
  if (replications == 0) throw ValidationError("replications must be >= 1");
  if (!std::isfinite(delta_exponent)) throw ValidationError("delta_exponent must be finite");
  if (threads < 1) throw ValidationError("threads must be >= 1");
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  if (name == "desk") return c;
  if (name == "paper") {
    c.dim = 20;
    c.base_samples = 300;
    c.rho = 0.8;
    c.n_grid = {10, 20, 50, 100, 200, 300};
    c.replications = 10;
    return c;
  }
  throw ValidationError("unknown preset '" + name + "' (expected desk or paper)");
}

ExperimentConfig config_from_json(const std::string& json_text, ExperimentConfig base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      const auto& v = it.value();
      if (key == "dim") base.dim = v.get<std::size_t>();
      else if (key == "base_samples") base.base_samples = v.get<std::size_t>();
      else if (key == "rho") base.rho = v.get<double>();
      else if (key == "n_grid") base.n_grid = v.get<std::vector<std::size_t>>();
      else if (key == "delta_exponent") base.delta_exponent = v.get<double>();
      else if (key == "replications") base.replications = v.get<std::size_t>();
      else if (key == "seed") base.seed = v.get<std::uint64_t>();
      else if (key == "cost") base.cost = CostSpec::parse(v.get<std::string>());
      else if (key == "resample") base.resample = v.get<bool>();
      else if (key == "threads") base.threads = v.get<int>();
      else throw ValidationError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad config value: ") + e.what());
  }
  base.validate();
  return base;
}

bool json_has_seed(const std::string& json_text) {
  try {
    auto j = nlohmann::json::parse(json_text);
    return j.is_object() && j.contains("seed");
  } catch (const nlohmann::json::exception&) {
    return false;
  }
}

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config) {
  config.validate();
  if (!config.resample) {
    for (std::size_t n : config.n_grid) {
      if (n != config.base_samples) {
        throw ValidationError("without resampling every n must equal base_samples");
      }
    }
  }
  const auto reps = static_cast<std::ptrdiff_t>(config.replications);
  std::vector<std::vector<ExperimentRow>> per_rep(config.replications);
  std::exception_ptr failure;
#pragma omp parallel for num_threads(config.threads) schedule(dynamic) if (config.threads > 1)
  for (std::ptrdiff_t r = 0; r < reps; ++r) {
    try {
      per_rep[static_cast<std::size_t>(r)] = run_replication(config, static_cast<std::size_t>(r));
    } catch (...) {
#pragma omp critical(otrelax_harness_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<ExperimentRow> rows;
  for (auto& block : per_rep) rows.insert(rows.end(), block.begin(), block.end());
  std::sort(rows.begin(), rows.end(), [](const ExperimentRow& a, const ExperimentRow& b) {
    return a.replication != b.replication ? a.replication < b.replication : a.n < b.n;
  });
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<ExperimentRow>& rows) {
  if (rows.empty()) throw ValidationError("nothing to summarize");
  std::map<std::size_t, std::vector<const ExperimentRow*>> by_n;
  for (const auto& r : rows) by_n[r.n].push_back(&r);

  auto mean_sd = [](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
    return std::pair{mean, sd};
  };

  std::vector<SummaryRow> out;
  for (const auto& [n, group] : by_n) {
    std::vector<double> g0, gd, ref;
    std::size_t closer = 0;
    for (const auto* r : group) {
      g0.push_back(r->g0_empirical);
      gd.push_back(r->g_delta_empirical);
      ref.push_back(r->g0_reference);
      if (std::abs(r->g_delta_empirical - r->g0_reference) <
          std::abs(r->g0_empirical - r->g0_reference)) {
        ++closer;
      }
    }
    SummaryRow s;
    s.n = n;
    s.count = group.size();
    s.delta_n = group.front()->delta_n;
    std::tie(s.g0_emp_mean, s.g0_emp_sd) = mean_sd(g0);
    std::tie(s.gdelta_emp_mean, s.gdelta_emp_sd) = mean_sd(gd);
    std::tie(s.g0_ref_mean, s.g0_ref_sd) = mean_sd(ref);
    s.closer_fraction = static_cast<double>(closer) / static_cast<double>(group.size());
    out.push_back(s);
  }
  return out;
}

std::string format_rows_csv(const std::vector<ExperimentRow>& rows) {
  std::string out = "n,rep,delta_n,g0_emp,gdelta_emp,g0_ref\n";
  for (const auto& r : rows) {
    out += std::to_string(r.n) + ',' + std::to_string(r.replication) + ',' + fmt17(r.delta_n) +
           ',' + fmt17(r.g0_empirical) + ',' + fmt17(r.g_delta_empirical) + ',' +
           fmt17(r.g0_reference) + '\n';
  }
  return out;
}

std::string format_summary_csv(const std::vector<SummaryRow>& summary) {
  std::string out =
      "n,count,delta_n,g0_emp_mean,g0_emp_sd,gdelta_emp_mean,gdelta_emp_sd,g0_ref_mean,"
      "g0_ref_sd,closer_fraction\n";
  for (const auto& s : summary) {
    out += std::to_string(s.n) + ',' + std::to_string(s.count) + ',' + fmt17(s.delta_n) + ',' +
           fmt17(s.g0_emp_mean) + ',' + fmt17(s.g0_emp_sd) + ',' + fmt17(s.gdelta_emp_mean) +
           ',' + fmt17(s.gdelta_emp_sd) + ',' + fmt17(s.g0_ref_mean) + ',' +
           fmt17(s.g0_ref_sd) + ',' + fmt17(s.closer_fraction) + '\n';
  }
  return out;
}

void emit_plot(const std::vector<SummaryRow>& summary, const std::string& path) {
  const std::string svg = render_plot_svg(summary);
  write_file(path, svg);
}

void write_experiment_outputs(const std::vector<ExperimentRow>& rows, const std::string& dir) {
  const auto summary = summarize(rows);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + dir + "'");
  const std::filesystem::path base(dir);
  write_file(base / "rows.csv", format_rows_csv(rows));
  write_file(base / "summary.csv", format_summary_csv(summary));
  emit_plot(summary, (base / "plot.svg").string());
}

}  // namespace otrelax
