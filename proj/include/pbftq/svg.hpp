#pragma once

// Minimal self-contained SVG line charts: one panel per metric, x axis is
// the first swept parameter, one polyline per value of the second.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "pbftq/sweep.hpp"

namespace pbftq {

inline std::string axis_label(const std::string& parameter) {
  if (parameter == "lambda") return "λ (packages / unit time)";
  if (parameter == "mu") return "μ (1 / unit time)";
  if (parameter == "f") return "f (Byzantine nodes)";
  if (parameter == "c") return "c (reward units / block)";
  return parameter;
}

inline std::string metric_label(const std::string& metric) {
  if (metric == "e_k") return "E[K] (packages)";
  if (metric == "e_m") return "E[M] (nodes)";
  if (metric == "gamma") return "γ (blocks / unit time)";
  if (metric == "upsilon") return "Υ (reward units / unit time)";
  return metric;
}

inline std::optional<double> metric_value(const SweepRow& row, const std::string& metric) {
  if (row.failed() || !row.metrics) return std::nullopt;
  const auto& m = *row.metrics;
  if (metric == "e_k") return m.e_k;
  if (metric == "e_m") return m.e_m;
  if (metric == "gamma") return m.gamma;
  if (metric == "upsilon") return m.upsilon;
  return std::nullopt;
}

inline double row_parameter(const SweepRow& row, const std::string& name) {
  if (name == "lambda") return row.lambda;
  if (name == "mu") return row.mu;
  if (name == "f") return row.f;
  return row.c;
}

/// Roughly five round tick positions covering [lo, hi].
inline std::vector<double> nice_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (span / step <= 6.0) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) {
    ticks.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
  }
  return ticks;
}

inline std::string render_svg(const SweepConfig& config,
                              const std::vector<SweepRow>& rows) {
  constexpr double kPanelW = 480, kPanelH = 360;
  constexpr double kLeft = 80, kRight = 20, kTop = 40, kBottom = 60;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

  const std::string x_name = config.swept.empty() ? "lambda" : config.swept[0].name;
  const std::optional<std::string> curve_name =
      config.swept.size() > 1 ? std::optional(config.swept[1].name) : std::nullopt;

  // Curve key -> rows in x order.
  std::map<double, std::vector<const SweepRow*>> curves;
  for (const auto& row : rows) {
    curves[curve_name ? row_parameter(row, *curve_name) : 0.0].push_back(&row);
  }
  for (auto& [key, members] : curves) {
    std::stable_sort(members.begin(), members.end(), [&](auto* a, auto* b) {
      return row_parameter(*a, x_name) < row_parameter(*b, x_name);
    });
  }

  const auto panels = config.plot_metrics.size();
  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      kPanelW * panels, kPanelH);

  for (std::size_t p = 0; p < panels; ++p) {
    const auto& metric = config.plot_metrics[p];
    const double ox = kPanelW * p;
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    for (const auto& row : rows) {
      const double x = row_parameter(row, x_name);
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      if (auto y = metric_value(row, metric)) {
        ylo = std::min(ylo, *y);
        yhi = std::max(yhi, *y);
      }
    }
    if (!std::isfinite(ylo)) ylo = 0.0, yhi = 1.0;
    if (!(xhi > xlo)) xlo -= 0.5, xhi += 0.5;
    if (!(yhi - ylo > 1e-9 * std::max(1.0, std::abs(yhi)))) {
      const double pad = std::max(std::abs(yhi) * 0.05, 1e-3);
      ylo -= pad;
      yhi += pad;
    }

    const double pw = kPanelW - kLeft - kRight, ph = kPanelH - kTop - kBottom;
    auto sx = [&](double x) { return ox + kLeft + (x - xlo) / (xhi - xlo) * pw; };
    auto sy = [&](double y) { return kTop + ph - (y - ylo) / (yhi - ylo) * ph; };

    svg += fmt::format(
        "<g>\n<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
        "fill=\"none\" stroke=\"black\"/>\n",
        ox + kLeft, kTop, pw, ph);
    for (double t : nice_ticks(xlo, xhi)) {
      svg += fmt::format(
          "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>"
          "<text x=\"{0:.2f}\" y=\"{3:.2f}\" text-anchor=\"middle\">{4:.4g}</text>\n",
          sx(t), kTop + ph, kTop + ph + 5, kTop + ph + 18, t);
    }
    for (double t : nice_ticks(ylo, yhi)) {
      svg += fmt::format(
          "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"black\"/>"
          "<text x=\"{3:.2f}\" y=\"{4:.2f}\" text-anchor=\"end\">{5:.4g}</text>\n",
          ox + kLeft - 5, sy(t), ox + kLeft, ox + kLeft - 8, sy(t) + 4, t);
    }
    svg += fmt::format(
        "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n",
        ox + kLeft + pw / 2, kPanelH - 15, axis_label(x_name));
    svg += fmt::format(
        "<text transform=\"translate({:.2f},{:.2f}) rotate(-90)\" "
        "text-anchor=\"middle\">{}</text>\n",
        ox + 18, kTop + ph / 2, metric_label(metric));

    std::size_t ci = 0;
    for (const auto& [key, members] : curves) {
      const char* color = kColors[ci % std::size(kColors)];
      std::string points;
      auto flush = [&] {
        if (!points.empty()) {
          svg += fmt::format(
              "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
              color, points);
        }
        points.clear();
      };
      for (const SweepRow* row : members) {
        if (auto y = metric_value(*row, metric)) {
          points += fmt::format("{}{:.2f},{:.2f}", points.empty() ? "" : " ",
                                sx(row_parameter(*row, x_name)), sy(*y));
        } else {
          flush();
        }
      }
      flush();
      if (curve_name) {
        const double ly = kTop + 15 + 16 * ci;
        svg += fmt::format(
            "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" "
            "stroke=\"{3}\" stroke-width=\"1.5\"/>"
            "<text x=\"{4:.2f}\" y=\"{5:.2f}\">{6} = {7:g}</text>\n",
            ox + kPanelW - kRight - 90, ly, ox + kPanelW - kRight - 70, color,
            ox + kPanelW - kRight - 65, ly + 4, *curve_name, key);
      }
      ++ci;
    }
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace pbftq
