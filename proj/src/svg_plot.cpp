#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "otrelax/errors.hpp"
#include "otrelax/harness.hpp"

namespace otrelax {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

// Maps data coordinates to the plot box; log10 on x and, when every value is
// positive, on y.
struct Axes {
  double x_lo, x_hi, y_lo, y_hi;
  bool log_y;

  double tx(double n) const {
    const double lx = std::log10(n);
    const double span = x_hi - x_lo;
    const double f = span > 0.0 ? (lx - x_lo) / span : 0.5;
    return kLeft + f * (kWidth - kLeft - kRight);
  }
  double ty(double v) const {
    const double ly = log_y ? std::log10(v) : v;
    const double span = y_hi - y_lo;
    const double f = span > 0.0 ? (ly - y_lo) / span : 0.5;
    return kHeight - kBottom - f * (kHeight - kTop - kBottom);
  }
};

}  // namespace

std::string render_plot_svg(const std::vector<SummaryRow>& summary) {
  if (summary.empty()) throw ValidationError("cannot plot an empty summary");

  double reference = 0.0;
  for (const auto& s : summary) reference += s.g0_ref_mean;
  reference /= static_cast<double>(summary.size());

  std::vector<double> ys{reference};
  for (const auto& s : summary) {
    ys.push_back(s.g0_emp_mean);
    ys.push_back(s.gdelta_emp_mean);
  }
  const bool log_y = std::all_of(ys.begin(), ys.end(), [](double v) { return v > 0.0; });
  auto ty_raw = [&](double v) { return log_y ? std::log10(v) : v; };
  double y_lo = ty_raw(ys.front()), y_hi = y_lo;
  for (double v : ys) {
    y_lo = std::min(y_lo, ty_raw(v));
    y_hi = std::max(y_hi, ty_raw(v));
  }
  const double pad = y_hi > y_lo ? 0.05 * (y_hi - y_lo) : 0.5;
  Axes axes{std::log10(static_cast<double>(summary.front().n)),
            std::log10(static_cast<double>(summary.back().n)), y_lo - pad, y_hi + pad, log_y};

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kWidth / 2) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
         "Estimating the optimal transport cost</text>\n";
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  svg += "<g stroke=\"black\" fill=\"none\"><line x1=\"" + num(x0) + "\" y1=\"" + num(y0) +
         "\" x2=\"" + num(x1) + "\" y2=\"" + num(y0) + "\"/><line x1=\"" + num(x0) + "\" y1=\"" +
         num(y0) + "\" x2=\"" + num(x0) + "\" y2=\"" + num(y1) + "\"/></g>\n";
  svg += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(kHeight - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">n (log scale)</text>\n";
  svg += "<text x=\"16\" y=\"" + num((y0 + y1) / 2) + "\" transform=\"rotate(-90 16 " +
         num((y0 + y1) / 2) + ")\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">" + std::string(log_y ? "cost (log scale)" : "cost") + "</text>\n";
  for (const auto& s : summary) {
    const double x = axes.tx(static_cast<double>(s.n));
    svg += "<text x=\"" + num(x) + "\" y=\"" + num(y0 + 16) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
           std::to_string(s.n) + "</text>\n";
  }

  const double ry = axes.ty(reference);
  svg += "<g class=\"series\" data-series=\"g0_ref\"><line x1=\"" + num(x0) + "\" y1=\"" +
         num(ry) + "\" x2=\"" + num(x1) + "\" y2=\"" + num(ry) +
         "\" stroke=\"black\" stroke-dasharray=\"6 4\"/></g>\n";

  auto series = [&](const char* name, const char* color, auto value) {
    std::string g = std::string("<g class=\"series\" data-series=\"") + name + "\" stroke=\"" +
                    color + "\" fill=\"" + color + "\">";
    if (summary.size() > 1) {
      g += "<polyline fill=\"none\" points=\"";
      for (std::size_t k = 0; k < summary.size(); ++k) {
        if (k) g += ' ';
        g += num(axes.tx(static_cast<double>(summary[k].n))) + ',' + num(axes.ty(value(summary[k])));
      }
      g += "\"/>";
    }
    for (const auto& s : summary) {
      g += "<circle class=\"marker\" cx=\"" + num(axes.tx(static_cast<double>(s.n))) +
           "\" cy=\"" + num(axes.ty(value(s))) + "\" r=\"3\"/>";
    }
    return g + "</g>\n";
  };
  svg += series("g0_emp", "#1f77b4", [](const SummaryRow& s) { return s.g0_emp_mean; });
  svg += series("gdelta_emp", "#d62728", [](const SummaryRow& s) { return s.gdelta_emp_mean; });

  const double lx = x1 - 180.0;
  svg += "<g font-family=\"sans-serif\" font-size=\"11\">"
         "<text x=\"" + num(lx) + "\" y=\"" + num(y1 + 12) + "\" fill=\"#1f77b4\">G0(mu_n, nu)</text>"
         "<text x=\"" + num(lx) + "\" y=\"" + num(y1 + 26) + "\" fill=\"#d62728\">G_delta_n(mu_n, nu)</text>"
         "<text x=\"" + num(lx) + "\" y=\"" + num(y1 + 40) + "\" fill=\"black\">G0(mu0, nu)</text></g>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace otrelax
