#pragma once

// Trajectory CSV: header `t,x1,…,xm,event`; an impulse moment gives two rows
// with equal t and event jump-left / jump-right, other rows leave event
// empty. Numbers are printed with 17 significant digits so they re-parse to
// the same doubles.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "impulsive/integrate.hpp"

namespace impulsive {

struct CsvRow {
  double t = 0;
  std::vector<double> x;
  std::string event;  ///< "", "jump-left" or "jump-right"
};

struct CsvTrajectory {
  std::size_t dim = 0;
  std::vector<CsvRow> rows;
};

/// %.17g.
std::string format_double(double v);

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

/// Throws ParseError (byte offset into the stream) on malformed input.
CsvTrajectory read_trajectory_csv(std::istream& in);
CsvTrajectory read_trajectory_csv(const std::filesystem::path& path);

/// Two-column CSV with the given header names.
void write_series_csv(const std::filesystem::path& path, const std::string& x_name,
                      const std::string& y_name,
                      const std::vector<std::pair<double, double>>& rows);

}  // namespace impulsive
