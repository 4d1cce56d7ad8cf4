#include "impulsive/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <iterator>
#include <sstream>
#include <tuple>

#include "impulsive/errors.hpp"

namespace impulsive {

namespace {

constexpr double kMarginLeft = 70, kMarginRight = 20, kMarginTop = 30, kMarginBottom = 40;
constexpr const char* kColors[] = {"#1f5fa8", "#b2412b", "#2e7d32", "#6a3d9a", "#8c6d1f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  if (std::abs(v) < 1e-12) v = 0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

// Pads a degenerate or tight range by 10%.
std::pair<double, double> padded(double lo, double hi) {
  double pad = 0.1 * (hi - lo);
  if (pad == 0) pad = lo == 0 ? 1.0 : 0.1 * std::abs(lo);
  return {lo - pad, hi + pad};
}

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int target) {
  if (!(hi > lo) || target < 1) return {lo};
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> out;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) out.push_back(v);
  return out;
}

std::string render_svg(const std::vector<SvgSeries>& series, const SvgOptions& opt) {
  if (series.empty()) throw DomainError("svg: no series");
  double tmin = std::numeric_limits<double>::infinity(), tmax = -tmin;
  for (const auto& s : series) {
    if (s.points.empty()) throw DomainError("svg: series '" + s.label + "' is empty");
    for (const auto& p : s.points) {
      if (!std::isfinite(p.t) || !std::isfinite(p.v))
        throw DomainError("svg: series '" + s.label + "' has a non-finite value");
      tmin = std::min(tmin, p.t);
      tmax = std::max(tmax, p.t);
    }
  }
  if (tmax == tmin) std::tie(tmin, tmax) = padded(tmin, tmax);

  const double plot_w = opt.width - kMarginLeft - kMarginRight;
  const double plot_h = opt.panel_height - kMarginTop - kMarginBottom;
  const double height = opt.panel_height * static_cast<double>(series.size()) + (opt.title.empty() ? 0 : 20);
  const double top0 = opt.title.empty() ? 0 : 20;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(opt.width) << "\" height=\""
      << fmt(height) << "\" viewBox=\"0 0 " << fmt(opt.width) << ' ' << fmt(height)
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!opt.title.empty())
    out << "<text x=\"" << fmt(opt.width / 2) << "\" y=\"16\" text-anchor=\"middle\" font-size=\"13\">"
        << escape(opt.title) << "</text>\n";

  const auto xticks = nice_ticks(tmin, tmax);
  for (std::size_t n = 0; n < series.size(); ++n) {
    const auto& s = series[n];
    double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
    for (const auto& p : s.points) {
      vmin = std::min(vmin, p.v);
      vmax = std::max(vmax, p.v);
    }
    std::tie(vmin, vmax) = padded(vmin, vmax);
    const double x0 = kMarginLeft, y0 = top0 + opt.panel_height * static_cast<double>(n) + kMarginTop;
    auto X = [&](double t) { return x0 + (t - tmin) / (tmax - tmin) * plot_w; };
    auto Y = [&](double v) { return y0 + (vmax - v) / (vmax - vmin) * plot_h; };
    const char* color = kColors[n % std::size(kColors)];

    out << "<g>\n";
    out << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(plot_w)
        << "\" height=\"" << fmt(plot_h) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (double t : xticks) {
      out << "<line x1=\"" << fmt(X(t)) << "\" y1=\"" << fmt(y0 + plot_h) << "\" x2=\"" << fmt(X(t))
          << "\" y2=\"" << fmt(y0 + plot_h + 5) << "\" stroke=\"#444\"/>";
      out << "<text x=\"" << fmt(X(t)) << "\" y=\"" << fmt(y0 + plot_h + 17)
          << "\" text-anchor=\"middle\">" << label(t) << "</text>\n";
    }
    for (double v : nice_ticks(vmin, vmax, 5)) {
      out << "<line x1=\"" << fmt(x0 - 5) << "\" y1=\"" << fmt(Y(v)) << "\" x2=\"" << fmt(x0)
          << "\" y2=\"" << fmt(Y(v)) << "\" stroke=\"#444\"/>";
      out << "<text x=\"" << fmt(x0 - 8) << "\" y=\"" << fmt(Y(v) + 4) << "\" text-anchor=\"end\">"
          << label(v) << "</text>\n";
    }
    out << "<text x=\"" << fmt(x0 + plot_w / 2) << "\" y=\"" << fmt(y0 + plot_h + 33)
        << "\" text-anchor=\"middle\">" << escape(opt.x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << fmt(y0 + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << fmt(y0 + plot_h / 2) << ")\">" << escape(s.label) << "</text>\n";

    // Split into continuous pieces; a piece of one point becomes a marker.
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= s.points.size(); ++i) {
      if (i < s.points.size() && !s.points[i].break_before) continue;
      if (i - begin == 1) {
        out << "<circle cx=\"" << fmt(X(s.points[begin].t)) << "\" cy=\"" << fmt(Y(s.points[begin].v))
            << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
      } else {
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t j = begin; j < i; ++j) {
          if (j > begin) out << ' ';
          out << fmt(X(s.points[j].t)) << ',' << fmt(Y(s.points[j].v));
        }
        out << "\"/>\n";
      }
      begin = i;
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::vector<SvgSeries> series_from_csv(const CsvTrajectory& csv) {
  std::vector<SvgSeries> out(csv.dim);
  for (std::size_t i = 0; i < csv.dim; ++i) out[i].label = "x" + std::to_string(i + 1);
  for (const auto& row : csv.rows) {
    const bool brk = row.event == "jump-right";
    for (std::size_t i = 0; i < csv.dim; ++i) out[i].points.push_back({row.t, row.x[i], brk});
  }
  return out;
}

}  // namespace impulsive
