#pragma once

// Self-contained SVG figures: phase diagrams and log-risk scatter plots.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sparse_testbench/error.hpp"
#include "sparse_testbench/theory.hpp"

namespace sparse_testbench::svg {

inline std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

/// Plot frame mapping data coordinates to pixels.
class Canvas {
 public:
  Canvas(double x_lo, double x_hi, double y_lo, double y_hi, int width = 640, int height = 480)
      : x_lo_(x_lo), x_hi_(x_hi), y_lo_(y_lo), y_hi_(y_hi), width_(width), height_(height) {
    if (!(x_hi > x_lo) || !(y_hi > y_lo)) throw DomainError("svg canvas needs a nonempty range");
  }

  double px(double x) const { return kLeft + (x - x_lo_) / (x_hi_ - x_lo_) * plot_w(); }
  double py(double y) const { return kTop + (y_hi_ - y) / (y_hi_ - y_lo_) * plot_h(); }

  void rect(double x0, double y0, double x1, double y1, const std::string& fill) {
    body_ << "<rect x=\"" << num(px(x0)) << "\" y=\"" << num(py(y1)) << "\" width=\""
          << num(px(x1) - px(x0)) << "\" height=\"" << num(py(y0) - py(y1)) << "\" style=\"fill:"
          << fill << ";stroke:none\"/>\n";
  }

  void polygon(const std::vector<std::pair<double, double>>& pts, const std::string& style,
               const std::string& id = "") {
    body_ << "<polygon" << (id.empty() ? "" : " id=\"" + id + "\"") << " points=\"";
    for (const auto& [x, y] : pts) body_ << num(px(x)) << ',' << num(py(y)) << ' ';
    body_ << "\" style=\"" << style << "\"/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& style,
                const std::string& id = "") {
    body_ << "<polyline" << (id.empty() ? "" : " id=\"" + id + "\"") << " points=\"";
    for (const auto& [x, y] : pts) body_ << num(px(x)) << ',' << num(py(y)) << ' ';
    body_ << "\" style=\"fill:none;" << style << "\"/>\n";
  }

  void circle(double x, double y, double radius, const std::string& fill) {
    body_ << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"" << radius
          << "\" style=\"fill:" << fill << "\"/>\n";
  }

  void text(double x_px, double y_px, const std::string& s, int size = 12,
            const std::string& anchor = "start") {
    body_ << "<text x=\"" << num(x_px) << "\" y=\"" << num(y_px) << "\" style=\"font-family:sans-serif;font-size:"
          << size << "px;text-anchor:" << anchor << "\">" << escape(s) << "</text>\n";
  }

  void legend(const std::vector<std::pair<std::string, std::string>>& entries) {
    double y = kTop + 10;
    for (const auto& [label, colour] : entries) {
      body_ << "<rect x=\"" << num(width_ - kRight + 12) << "\" y=\"" << num(y - 9)
            << "\" width=\"10\" height=\"10\" style=\"fill:" << colour << ";stroke:#333\"/>\n";
      text(width_ - kRight + 26, y, label, 11);
      y += 16;
    }
  }

  /// Axes, ticks, labels and title; returns the finished document.
  std::string finish(const std::string& title, const std::string& x_label,
                     const std::string& y_label) const {
    std::ostringstream doc;
    doc << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
        << height_ << "\" viewBox=\"0 0 " << width_ << ' ' << height_ << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << width_ << "\" height=\"" << height_
        << "\" style=\"fill:#ffffff\"/>\n";
    doc << body_.str();
    doc << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << num(plot_w())
        << "\" height=\"" << num(plot_h()) << "\" style=\"fill:none;stroke:#000\"/>\n";
    std::ostringstream ticks;
    for (int i = 0; i <= 4; ++i) {
      const double xv = x_lo_ + (x_hi_ - x_lo_) * i / 4.0;
      const double yv = y_lo_ + (y_hi_ - y_lo_) * i / 4.0;
      ticks << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(kTop + plot_h() + 16)
            << "\" style=\"font-family:sans-serif;font-size:10px;text-anchor:middle\">" << tick(xv)
            << "</text>\n";
      ticks << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(yv) + 3)
            << "\" style=\"font-family:sans-serif;font-size:10px;text-anchor:end\">" << tick(yv)
            << "</text>\n";
    }
    doc << ticks.str();
    doc << "<text x=\"" << num(kLeft + plot_w() / 2) << "\" y=\"" << height_ - 10
        << "\" style=\"font-family:sans-serif;font-size:12px;text-anchor:middle\">" << escape(x_label)
        << "</text>\n";
    doc << "<text x=\"14\" y=\"" << num(kTop + plot_h() / 2) << "\" transform=\"rotate(-90 14 "
        << num(kTop + plot_h() / 2) << ")\" style=\"font-family:sans-serif;font-size:12px;text-anchor:middle\">"
        << escape(y_label) << "</text>\n";
    doc << "<text x=\"" << num(width_ / 2.0) << "\" y=\"20\" style=\"font-family:sans-serif;font-size:14px;text-anchor:middle\">"
        << escape(title) << "</text>\n";
    doc << "</svg>\n";
    return doc.str();
  }

  int width() const { return width_; }

 private:
  static constexpr double kLeft = 60, kTop = 36, kRight = 190, kBottom = 46;
  double plot_w() const { return width_ - kLeft - kRight; }
  double plot_h() const { return height_ - kTop - kBottom; }
  static std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }

  double x_lo_, x_hi_, y_lo_, y_hi_;
  int width_, height_;
  std::ostringstream body_;
};

inline std::string label_colour(const std::string& label) {
  static const std::map<std::string, std::string> colours = {
      {"powerless region", "#bdbdbd"},     {"powerful region", "#ffffff"},
      {"below_dense", "#c6dbef"},          {"below_sparse_small_r", "#9ecae1"},
      {"below_sparse_large_r", "#6baed6"}, {"above_dense_near", "#fdd0a2"},
      {"above_dense_far", "#fd8d3c"},      {"above_sparse", "#3182bd"},
      {"boundary_fixed_s", "#a1d99b"},     {"gap", "#f0f0f0"},
  };
  auto it = colours.find(label);
  return it == colours.end() ? "#999999" : it->second;
}

/// Phase diagram. figure1 modes shade the powerless region as one polygon
/// bounded by the detection boundary; figure2 modes colour grid cells.
inline std::string phase_diagram_svg(const PhaseGrid& grid) {
  Canvas canvas(grid.alpha_lo, grid.alpha_hi, grid.y_lo, grid.y_hi);
  std::vector<std::pair<std::string, std::string>> legend;
  if (grid.mode == PhaseMode::figure1_sparse) {
    constexpr int kSamples = 400;
    std::vector<std::pair<double, double>> curve;
    for (int i = 0; i <= kSamples; ++i) {
      // Open interval (1/2, 1): nudge the end points inside.
      double a = grid.alpha_lo + (grid.alpha_hi - grid.alpha_lo) * i / kSamples;
      a = std::clamp(a, 0.5 + 1e-9, 1.0 - 1e-9);
      curve.emplace_back(a, std::min(rho_star(a), grid.y_hi));
    }
    auto region = curve;
    region.emplace_back(grid.alpha_hi, grid.y_lo);
    region.emplace_back(grid.alpha_lo, grid.y_lo);
    canvas.polygon(region, "fill:" + label_colour("powerless region") + ";stroke:none",
                   "powerless-region");
    canvas.polyline(curve, "stroke:#000;stroke-width:2", "detection-boundary");
    legend = {{"powerless region", label_colour("powerless region")},
              {"powerful region", label_colour("powerful region")}};
  } else if (grid.mode == PhaseMode::figure1_dense) {
    canvas.polygon({{grid.alpha_lo, grid.y_lo}, {grid.alpha_hi, grid.y_lo}, {grid.alpha_hi, 0.0},
                    {grid.alpha_lo, 0.0}},
                   "fill:" + label_colour("powerless region") + ";stroke:none", "powerless-region");
    canvas.polyline({{grid.alpha_lo, 0.0}, {grid.alpha_hi, 0.0}}, "stroke:#000;stroke-width:2",
                    "detection-boundary");
    legend = {{"powerless region", label_colour("powerless region")},
              {"powerful region", label_colour("powerful region")}};
  } else {
    const double da = (grid.alpha_hi - grid.alpha_lo) / grid.alpha_cells;
    const double dy = (grid.y_hi - grid.y_lo) / grid.y_cells;
    std::map<std::string, bool> seen;
    for (const auto& cell : grid.cells) {
      canvas.rect(cell.alpha - da / 2, cell.y - dy / 2, cell.alpha + da / 2, cell.y + dy / 2,
                  label_colour(cell.label));
      seen[cell.label] = true;
    }
    for (const auto& [label, _] : seen) legend.emplace_back(label, label_colour(label));
  }
  canvas.legend(legend);
  return canvas.finish(std::string(to_string(grid.mode)), "alpha", grid.y_name);
}

struct ScatterSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
  /// Reference line of this slope through the centroid of the points.
  std::optional<double> reference_slope;
  /// Horizontal reference level (risk_itself predictions).
  std::optional<double> reference_level;
};

inline std::string scatter_svg(const std::vector<ScatterSeries>& series, const std::string& title,
                               const std::string& x_label, const std::string& y_label) {
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      x_lo = std::min(x_lo, x), x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y), y_hi = std::max(y_hi, y);
    }
    if (s.reference_level) {
      y_lo = std::min(y_lo, *s.reference_level);
      y_hi = std::max(y_hi, *s.reference_level);
    }
  }
  if (!std::isfinite(x_lo)) throw DomainError("scatter plot needs at least one point");
  const double xpad = x_hi > x_lo ? 0.05 * (x_hi - x_lo) : 1.0;
  const double ypad = y_hi > y_lo ? 0.08 * (y_hi - y_lo) : 1.0;
  Canvas canvas(x_lo - xpad, x_hi + xpad, y_lo - ypad, y_hi + ypad);
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  std::vector<std::pair<std::string, std::string>> legend;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const std::string colour = palette[i % 8];
    legend.emplace_back(s.name, colour);
    if (s.points.empty()) continue;
    double mx = 0, my = 0;
    for (const auto& [x, y] : s.points) mx += x, my += y;
    mx /= double(s.points.size()), my /= double(s.points.size());
    if (s.reference_slope) {
      const double a = x_lo - xpad, b = x_hi + xpad;
      canvas.polyline({{a, my + *s.reference_slope * (a - mx)}, {b, my + *s.reference_slope * (b - mx)}},
                      "stroke:" + colour + ";stroke-width:1.5;stroke-dasharray:6,4", "reference-line");
    }
    if (s.reference_level) {
      canvas.polyline({{x_lo - xpad, *s.reference_level}, {x_hi + xpad, *s.reference_level}},
                      "stroke:" + colour + ";stroke-width:1.5;stroke-dasharray:6,4", "reference-line");
    }
    for (const auto& [x, y] : s.points) canvas.circle(x, y, 4, colour);
  }
  canvas.legend(legend);
  return canvas.finish(title, x_label, y_label);
}

}  // namespace sparse_testbench::svg
