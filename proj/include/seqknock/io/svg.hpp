#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "seqknock/multi_knockoff.hpp"

namespace seqknock::io {

namespace detail {

/// Fixed two-decimal coordinate, locale-independent.
inline std::string fx(double v) {
  char buf[48];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

inline std::string escape_xml(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline const char* palette(std::size_t k) {
  static constexpr const char* colours[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                            "#66a61e", "#e6ab02", "#a6761d", "#666666"};
  return colours[k % 8];
}

}  // namespace detail

/// Selection heatmap: one row per variable (in `data.order`), one column per
/// draw, filled where selected, with the selection frequency at the right.
/// Consecutive selected draws are merged into one rectangle.
inline void write_heatmap_svg(std::ostream& os, const SelectionMatrix& mat, const HeatmapData& data) {
  using detail::fx;
  const std::size_t p = data.order.size();
  const std::size_t b = mat.draws();
  const double label_w = 120.0, freq_w = 60.0, top = 30.0, row_h = 14.0;
  const double plot_w = std::clamp(static_cast<double>(b) * 2.0, 200.0, 800.0);
  const double cell_w = b ? plot_w / static_cast<double>(b) : plot_w;
  const double width = label_w + plot_w + freq_w + 10.0;
  const double height = top + row_h * static_cast<double>(p) + 30.0;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fx(width) << "\" height=\"" << fx(height)
     << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << fx(label_w) << "\" y=\"18\" font-size=\"12\">Selections over " << b
     << " knockoff draws</text>\n";
  for (std::size_t r = 0; r < p; ++r) {
    const auto j = data.order[r];
    const double y = top + row_h * static_cast<double>(r);
    const std::string& name = j < mat.variable_names.size() ? mat.variable_names[j] : "x" + std::to_string(j + 1);
    os << "<text x=\"" << fx(label_w - 4.0) << "\" y=\"" << fx(y + row_h - 3.0) << "\" text-anchor=\"end\">"
       << detail::escape_xml(name) << "</text>\n";
    os << "<rect x=\"" << fx(label_w) << "\" y=\"" << fx(y) << "\" width=\"" << fx(plot_w) << "\" height=\""
       << fx(row_h - 1.0) << "\" fill=\"#f0f0f0\"/>\n";
    std::size_t d = 0;
    while (d < b) {
      if (!mat.indicators(static_cast<Index>(d), static_cast<Index>(j))) {
        ++d;
        continue;
      }
      std::size_t e = d;
      while (e < b && mat.indicators(static_cast<Index>(e), static_cast<Index>(j))) ++e;
      os << "<rect x=\"" << fx(label_w + cell_w * static_cast<double>(d)) << "\" y=\"" << fx(y) << "\" width=\""
         << fx(cell_w * static_cast<double>(e - d)) << "\" height=\"" << fx(row_h - 1.0)
         << "\" fill=\"#253494\"/>\n";
      d = e;
    }
    os << "<text x=\"" << fx(label_w + plot_w + 6.0) << "\" y=\"" << fx(y + row_h - 3.0) << "\">"
       << fx(data.frequency[j]) << "</text>\n";
  }
  const double axis_y = top + row_h * static_cast<double>(p) + 14.0;
  os << "<text x=\"" << fx(label_w + plot_w / 2.0) << "\" y=\"" << fx(axis_y)
     << "\" text-anchor=\"middle\">draw</text>\n";
  os << "</svg>\n";
}

struct CurveSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> se;  // optional error bars, same length as y
};

/// Line chart with one series per method; `reference` draws a dashed
/// horizontal line (e.g. the target FDR) when finite.
inline void write_curve_panel(std::ostream& os, double ox, double oy, double w, double h, const std::string& title,
                              const std::string& y_label, const std::vector<CurveSeries>& series, double reference) {
  using detail::fx;
  double xmin = INFINITY, xmax = -INFINITY;
  for (const auto& s : series) {
    for (const double v : s.x) {
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
  }
  if (!std::isfinite(xmin)) xmin = 0.0, xmax = 1.0;
  if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
  const auto px = [&](double v) { return ox + (v - xmin) / (xmax - xmin) * w; };
  const auto py = [&](double v) { return oy + h - std::clamp(v, 0.0, 1.0) * h; };
  os << "<text x=\"" << fx(ox + w / 2.0) << "\" y=\"" << fx(oy - 8.0) << "\" text-anchor=\"middle\" font-size=\"12\">"
     << detail::escape_xml(title) << "</text>\n";
  os << "<rect x=\"" << fx(ox) << "\" y=\"" << fx(oy) << "\" width=\"" << fx(w) << "\" height=\"" << fx(h)
     << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = k / 4.0;
    os << "<line x1=\"" << fx(ox - 4.0) << "\" y1=\"" << fx(py(v)) << "\" x2=\"" << fx(ox) << "\" y2=\"" << fx(py(v))
       << "\" stroke=\"#444\"/><text x=\"" << fx(ox - 6.0) << "\" y=\"" << fx(py(v) + 3.0)
       << "\" text-anchor=\"end\">" << fx(v) << "</text>\n";
  }
  std::vector<double> ticks;
  for (const auto& s : series) ticks.insert(ticks.end(), s.x.begin(), s.x.end());
  std::sort(ticks.begin(), ticks.end());
  ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
  for (const double t : ticks) {
    os << "<line x1=\"" << fx(px(t)) << "\" y1=\"" << fx(oy + h) << "\" x2=\"" << fx(px(t)) << "\" y2=\""
       << fx(oy + h + 4.0) << "\" stroke=\"#444\"/><text x=\"" << fx(px(t)) << "\" y=\"" << fx(oy + h + 15.0)
       << "\" text-anchor=\"middle\">" << ::seqknock::detail::format_double(t) << "</text>\n";
  }
  os << "<text x=\"" << fx(ox + w / 2.0) << "\" y=\"" << fx(oy + h + 30.0)
     << "\" text-anchor=\"middle\">amplitude</text>\n";
  os << "<text x=\"" << fx(ox - 34.0) << "\" y=\"" << fx(oy + h / 2.0) << "\" text-anchor=\"middle\" transform=\"rotate(-90 "
     << fx(ox - 34.0) << ' ' << fx(oy + h / 2.0) << ")\">" << detail::escape_xml(y_label) << "</text>\n";
  if (std::isfinite(reference)) {
    os << "<line x1=\"" << fx(ox) << "\" y1=\"" << fx(py(reference)) << "\" x2=\"" << fx(ox + w) << "\" y2=\""
       << fx(py(reference)) << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    std::string points;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      points += fx(px(s.x[i])) + "," + fx(py(s.y[i])) + " ";
    }
    os << "<polyline fill=\"none\" stroke=\"" << detail::palette(k) << "\" stroke-width=\"1.5\" points=\"" << points
       << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      if (i < s.se.size() && std::isfinite(s.se[i]) && s.se[i] > 0.0) {
        os << "<line x1=\"" << fx(px(s.x[i])) << "\" y1=\"" << fx(py(s.y[i] - 2.0 * s.se[i])) << "\" x2=\""
           << fx(px(s.x[i])) << "\" y2=\"" << fx(py(s.y[i] + 2.0 * s.se[i])) << "\" stroke=\"" << detail::palette(k)
           << "\"/>\n";
      }
      os << "<circle cx=\"" << fx(px(s.x[i])) << "\" cy=\"" << fx(py(s.y[i])) << "\" r=\"2.5\" fill=\""
         << detail::palette(k) << "\"/>\n";
    }
  }
}

/// FDR and power against amplitude, side by side, with a shared legend.
/// Error bars span ±2 SE.
inline void write_curves_svg(std::ostream& os, const std::string& title, const std::vector<CurveSeries>& fdr,
                             const std::vector<CurveSeries>& power, double q) {
  using detail::fx;
  const double pw = 300.0, ph = 220.0, left = 60.0, top = 50.0, gap = 80.0;
  const double width = left + 2.0 * pw + gap + 170.0;
  const double height = top + ph + 60.0;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fx(width) << "\" height=\"" << fx(height)
     << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << fx(left) << "\" y=\"16\" font-size=\"13\">" << detail::escape_xml(title) << "</text>\n";
  write_curve_panel(os, left, top, pw, ph, "Empirical FDR", "mean FDP", fdr, q);
  write_curve_panel(os, left + pw + gap, top, pw, ph, "Power", "mean TPP", power, NAN);
  const double lx = left + 2.0 * pw + gap + 20.0;
  for (std::size_t k = 0; k < fdr.size(); ++k) {
    const double y = top + 14.0 * static_cast<double>(k);
    os << "<rect x=\"" << fx(lx) << "\" y=\"" << fx(y) << "\" width=\"10\" height=\"10\" fill=\"" << detail::palette(k)
       << "\"/><text x=\"" << fx(lx + 14.0) << "\" y=\"" << fx(y + 9.0) << "\">" << detail::escape_xml(fdr[k].label)
       << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace seqknock::io
