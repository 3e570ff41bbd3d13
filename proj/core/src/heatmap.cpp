// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include "langloop/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "langloop/errors.hpp"

namespace langloop {

namespace {

struct Rgb {
  double r, g, b;
};

// RdBu-style anchors: warm for low values, cool for high.
constexpr Rgb kWarm{178.0, 24.0, 43.0};
constexpr Rgb kNeutral{247.0, 247.0, 247.0};
constexpr Rgb kCool{33.0, 102.0, 172.0};

Rgb lerp(const Rgb& a, const Rgb& b, double t) {
  return Rgb{a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t,
             a.b + (b.b - a.b) * t};
}

std::string to_hex(const Rgb& c) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                static_cast<int>(std::lround(std::clamp(c.r, 0.0, 255.0))),
                static_cast<int>(std::lround(std::clamp(c.g, 0.0, 255.0))),
                static_cast<int>(std::lround(std::clamp(c.b, 0.0, 255.0))));
  return buf;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void escape_into(std::ostringstream& out, const std::string& s) {
  for (char c : s) {
    switch (c) {
      case '&': out << "&amp;"; break;
      case '<': out << "&lt;"; break;
      case '>': out << "&gt;"; break;
      default: out << c;
    }
  }
}

}  // namespace

std::string heatmap_fill(double value, double lo, double mid, double hi) {
  if (std::isnan(value)) {
    return "#c8c8c8";
  }
  if (value >= mid) {
    const double span = hi - mid;
    const double t = span <= 0.0 ? 0.0 : std::clamp((value - mid) / span, 0.0, 1.0);
    return to_hex(lerp(kNeutral, kCool, t));
  }
  const double span = mid - lo;
  const double t = span <= 0.0 ? 0.0 : std::clamp((mid - value) / span, 0.0, 1.0);
  return to_hex(lerp(kNeutral, kWarm, t));
}

std::string render_heatmap_svg(const LabeledMatrix& matrix,
                               const HeatmapStyle& style) {
  if (matrix.rows() == 0 || matrix.cols() == 0) {
    throw Error("heatmap: empty matrix");
  }
  double lo = 0.0, hi = 0.0, sum = 0.0;
  std::size_t finite = 0;
  for (double v : matrix.cells) {
    if (std::isnan(v)) continue;
    if (finite == 0) {
      lo = hi = v;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    sum += v;
    ++finite;
  }
  if (finite == 0) {
    throw Error("heatmap: matrix has no finite cells");
  }
  double mid;
  if (style.midpoint.has_value()) {
    mid = *style.midpoint;
  } else if (lo < 0.0 && hi > 0.0) {
    mid = 0.0;  // transfer-delta style data
  } else {
    mid = sum / static_cast<double>(finite);
  }
  mid = std::clamp(mid, lo, hi);

  const double cell = style.cell_size;
  const double label_w = 90.0;
  const double label_h = 70.0;
  const double legend_w = 60.0;
  const double title_h = style.title.empty() ? 0.0 : 24.0;
  const double grid_w = cell * static_cast<double>(matrix.cols());
  const double grid_h = cell * static_cast<double>(matrix.rows());
  const double width = label_w + grid_w + legend_w + 20.0;
  const double height = title_h + label_h + grid_h + 16.0;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width)
      << "\" height=\"" << fmt(height) << "\" viewBox=\"0 0 " << fmt(width)
      << ' ' << fmt(height) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  if (!style.title.empty()) {
    svg << "<text x=\"" << fmt(label_w) << "\" y=\"16\" font-family=\"monospace\""
        << " font-size=\"13\">";
    escape_into(svg, style.title);
    svg << "</text>\n";
  }

  // Column labels, rotated.
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    const double x = label_w + (static_cast<double>(c) + 0.5) * cell;
    const double y = title_h + label_h - 6.0;
    svg << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y)
        << "\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"start\""
        << " transform=\"rotate(-60 " << fmt(x) << ' ' << fmt(y) << ")\">";
    escape_into(svg, matrix.col_labels[c]);
    svg << "</text>\n";
  }
  // Row labels.
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const double y = title_h + label_h + (static_cast<double>(r) + 0.7) * cell;
    svg << "<text x=\"" << fmt(label_w - 6.0) << "\" y=\"" << fmt(y)
        << "\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"end\">";
    escape_into(svg, matrix.row_labels[r]);
    svg << "</text>\n";
  }
  // Cells.
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      const double x = label_w + static_cast<double>(c) * cell;
      const double y = title_h + label_h + static_cast<double>(r) * cell;
      svg << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\""
          << fmt(cell) << "\" height=\"" << fmt(cell) << "\" fill=\""
          << heatmap_fill(matrix.at(r, c), lo, mid, hi)
          << "\" stroke=\"#ffffff\" stroke-width=\"0.5\"><title>"
          << matrix.row_labels[r] << ',' << matrix.col_labels[c] << '='
          << fmt(matrix.at(r, c)) << "</title></rect>\n";
    }
  }

  // Legend: vertical gradient with min/mid/max ticks.
  const double lx = label_w + grid_w + 16.0;
  const double ly = title_h + label_h;
  const int steps = 32;
  const double step_h = grid_h / steps;
  for (int s = 0; s < steps; ++s) {
    // top = hi (cool), bottom = lo (warm)
    const double frac = 1.0 - (static_cast<double>(s) + 0.5) / steps;
    const double v = lo + frac * (hi - lo);
    svg << "<rect x=\"" << fmt(lx) << "\" y=\""
        << fmt(ly + s * step_h) << "\" width=\"12\" height=\""
        << fmt(step_h + 0.5) << "\" fill=\"" << heatmap_fill(v, lo, mid, hi)
        << "\"/>\n";
  }
  svg << "<text x=\"" << fmt(lx + 16.0) << "\" y=\"" << fmt(ly + 8.0)
      << "\" font-family=\"monospace\" font-size=\"9\">" << fmt(hi)
      << "</text>\n";
  svg << "<text x=\"" << fmt(lx + 16.0) << "\" y=\""
      << fmt(ly + grid_h / 2.0 + 3.0)
      << "\" font-family=\"monospace\" font-size=\"9\">" << fmt(mid)
      << "</text>\n";
  svg << "<text x=\"" << fmt(lx + 16.0) << "\" y=\"" << fmt(ly + grid_h)
      << "\" font-family=\"monospace\" font-size=\"9\">" << fmt(lo)
      << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace langloop
