#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "otrelax/cost.hpp"

namespace otrelax {

// Estimation experiment: mu0 is a factor-model sample, nu a standard normal
// sample, mu_n a resample of mu0; compare G0(mu_n, nu), G_{delta_n}(mu_n, nu)
// with delta_n = n^-delta_exponent, and the reference G0(mu0, nu).
struct ExperimentConfig {
  std::size_t dim = 3;
  std::size_t base_samples = 50;
  double rho = 0.8;
  std::vector<std::size_t> n_grid{10, 20, 40, 80};
  double delta_exponent = 0.45;
  std::size_t replications = 50;
  std::uint64_t seed = 0;
  CostSpec cost = CostSpec::squared_euclidean();
  bool resample = true;  // false: mu_n is mu0 itself
  int threads = 1;

  void validate() const;
};

// "desk" (d=3, 50 atoms, n in {10,20,40,80}, 50 replications) or
// "paper" (d=20, 300 atoms, n up to 300).
ExperimentConfig preset(const std::string& name);

// Overlays the fields present in a JSON object onto `base`. Unknown keys are errors.
ExperimentConfig config_from_json(const std::string& json_text, ExperimentConfig base);
bool json_has_seed(const std::string& json_text);

struct ExperimentRow {
  std::size_t n = 0;
  std::size_t replication = 0;
  double delta_n = 0.0;
  double g0_empirical = 0.0;
  double g_delta_empirical = 0.0;
  double g0_reference = 0.0;
};

// Rows sorted by (replication, n). Replications run in parallel when
// config.threads > 1; the output does not depend on the thread count.
std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config);

struct SummaryRow {
  std::size_t n = 0;
  std::size_t count = 0;
  double delta_n = 0.0;
  double g0_emp_mean = 0.0;
  double g0_emp_sd = 0.0;
  double gdelta_emp_mean = 0.0;
  double gdelta_emp_sd = 0.0;
  double g0_ref_mean = 0.0;
  double g0_ref_sd = 0.0;
  // Share of replications where G_delta is closer to the reference than G0 is.
  double closer_fraction = 0.0;
};

std::vector<SummaryRow> summarize(const std::vector<ExperimentRow>& rows);

std::string format_rows_csv(const std::vector<ExperimentRow>& rows);
std::string format_summary_csv(const std::vector<SummaryRow>& summary);

// Log-log SVG of the mean G0 and G_delta series against n, with a horizontal
// line at the mean reference value. Byte-identical for identical input.
std::string render_plot_svg(const std::vector<SummaryRow>& summary);
void emit_plot(const std::vector<SummaryRow>& summary, const std::string& path);

// Writes rows.csv, summary.csv and plot.svg into `dir` (created if missing).
void write_experiment_outputs(const std::vector<ExperimentRow>& rows, const std::string& dir);

}  // namespace otrelax
