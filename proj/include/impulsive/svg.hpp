#pragma once

// Minimal SVG time-series plotter: one panel per series, stacked vertically,
// with axes, tick labels and polylines that break at discontinuities.

#include <string>
#include <vector>

#include "impulsive/csv.hpp"

namespace impulsive {

struct SvgPoint {
  double t = 0;
  double v = 0;
  bool break_before = false;  ///< no segment joins this point to the previous one
};

struct SvgSeries {
  std::string label;
  std::vector<SvgPoint> points;
};

struct SvgOptions {
  double width = 900;
  double panel_height = 260;
  std::string title;
  std::string x_label = "t";
};

/// Throws DomainError on an empty series list, an empty series or a
/// non-finite value.
std::string render_svg(const std::vector<SvgSeries>& series, const SvgOptions& opt = {});

/// One series per coordinate; a jump-right row starts a new piece.
std::vector<SvgSeries> series_from_csv(const CsvTrajectory& csv);

/// Tick positions 1·10^k, 2·10^k or 5·10^k apart covering [lo, hi], about
/// `target` of them.
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

}  // namespace impulsive
