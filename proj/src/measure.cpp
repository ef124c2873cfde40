#include "otrelax/measure.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "otrelax/errors.hpp"
#include "otrelax/rng.hpp"

namespace otrelax {

DiscreteMeasure::DiscreteMeasure(std::size_t dim, std::vector<double> points,
                                 std::vector<double> weights)
    : dim_(dim), points_(std::move(points)), weights_(std::move(weights)) {
  if (dim_ == 0) throw ValidationError("measure dimension must be positive");
  if (weights_.empty()) throw ValidationError("measure must have at least one atom");
  if (points_.size() != weights_.size() * dim_) {
    throw ValidationError("measure points do not match weights.size() * dim");
  }
  for (double x : points_) {
    if (!std::isfinite(x)) throw ValidationError("measure has a non-finite coordinate");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ValidationError("measure weights must be finite and nonnegative");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightSumTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "measure weights sum to " << total << ", expected 1";
    throw ValidationError(msg.str());
  }
}

DiscreteMeasure empirical_from_samples(const std::vector<std::vector<double>>& samples) {
  if (samples.empty()) throw ValidationError("no samples");
  const std::size_t dim = samples.front().size();
  std::vector<double> points;
  points.reserve(samples.size() * dim);
  for (const auto& s : samples) {
    if (s.size() != dim) throw ValidationError("samples have ragged dimensions");
    points.insert(points.end(), s.begin(), s.end());
  }
  std::vector<double> weights(samples.size(), 1.0 / static_cast<double>(samples.size()));
  return DiscreteMeasure(dim, std::move(points), std::move(weights));
}

namespace {

DiscreteMeasure uniform_measure(std::size_t dim, std::size_t n, std::vector<double> points) {
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  return DiscreteMeasure(dim, std::move(points), std::move(weights));
}

}  // namespace

DiscreteMeasure sample_factor_model(const FactorModelParams& params) {
  if (params.dim == 0 || params.n_samples == 0) {
    throw ValidationError("factor model needs positive dim and n_samples");
  }
  if (!(params.rho >= 0.0 && params.rho <= 1.0)) {
    throw ValidationError("factor model rho must lie in [0, 1]");
  }
  Engine eng = make_engine(params.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double shared = std::sqrt(1.0 - params.rho * params.rho);
  std::vector<double> points(params.n_samples * params.dim);
  for (std::size_t s = 0; s < params.n_samples; ++s) {
    const double t = normal(eng);
    for (std::size_t i = 0; i < params.dim; ++i) {
      points[s * params.dim + i] = params.rho * normal(eng) + shared * t;
    }
  }
  return uniform_measure(params.dim, params.n_samples, std::move(points));
}

DiscreteMeasure sample_standard_normal(std::size_t dim, std::size_t n, std::uint64_t seed) {
  if (dim == 0 || n == 0) throw ValidationError("normal sample needs positive dim and n");
  Engine eng = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> points(n * dim);
  for (double& x : points) x = normal(eng);
  return uniform_measure(dim, n, std::move(points));
}

DiscreteMeasure resample(const DiscreteMeasure& mu, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ValidationError("resample size must be positive");
  Engine eng = make_engine(seed);
  std::discrete_distribution<std::size_t> pick(mu.weights().begin(), mu.weights().end());
  std::vector<double> points;
  points.reserve(n * mu.dim());
  for (std::size_t s = 0; s < n; ++s) {
    auto p = mu.point(pick(eng));
    points.insert(points.end(), p.begin(), p.end());
  }
  return uniform_measure(mu.dim(), n, std::move(points));
}

// --- CSV --------------------------------------------------------------------

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_double(std::string_view field, std::size_t line_no) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw ValidationError("line " + std::to_string(line_no) + ": cannot parse number '" +
                          std::string(field) + "'");
  }
  return value;
}

void append_double(std::string& out, double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  out.append(buf, ptr);
}

}  // namespace

DiscreteMeasure parse_measure_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  bool have_header = false;
  std::vector<double> points;
  std::vector<double> weights;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    auto fields = split_commas(view);
    if (!have_header) {
      if (fields.size() < 2 || trim(fields[0]) != "w") {
        throw ValidationError("measure CSV header must be `w,x1,...,xd`");
      }
      for (std::size_t k = 1; k < fields.size(); ++k) {
        if (trim(fields[k]) != "x" + std::to_string(k)) {
          throw ValidationError("measure CSV header must be `w,x1,...,xd`");
        }
      }
      dim = fields.size() - 1;
      have_header = true;
      continue;
    }
    if (fields.size() != dim + 1) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(dim + 1) + " fields");
    }
    weights.push_back(parse_double(fields[0], line_no));
    for (std::size_t k = 1; k <= dim; ++k) points.push_back(parse_double(fields[k], line_no));
  }
  if (!have_header) throw ValidationError("measure CSV is empty");
  return DiscreteMeasure(dim, std::move(points), std::move(weights));
}

DiscreteMeasure read_measure_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open measure file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_measure_csv(buf.str());
}

std::string format_measure_csv(const DiscreteMeasure& mu) {
  std::string out = "w";
  for (std::size_t k = 1; k <= mu.dim(); ++k) out += ",x" + std::to_string(k);
  out += '\n';
  for (std::size_t i = 0; i < mu.size(); ++i) {
    append_double(out, mu.weight(i));
    for (double x : mu.point(i)) {
      out += ',';
      append_double(out, x);
    }
    out += '\n';
  }
  return out;
}

void write_measure_csv(const DiscreteMeasure& mu, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write measure file '" + path + "'");
  out << format_measure_csv(mu);
  if (!out) throw ValidationError("failed writing measure file '" + path + "'");
}

}  // namespace otrelax
