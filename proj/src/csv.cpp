#include "impulsive/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

#include "impulsive/errors.hpp"

namespace impulsive {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write_row(std::ostream& out, double t, std::span<const double> x, const char* event) {
  out << format_double(t);
  for (double v : x) out << ',' << format_double(v);
  out << ',' << event << '\n';
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(const std::string& field, std::size_t offset) {
  if (field.empty()) throw ParseError("csv: empty number", offset);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size() || errno == ERANGE || !std::isfinite(v))
    throw ParseError("csv: bad number '" + field + "'", offset);
  return v;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << 't';
  for (std::size_t i = 1; i <= traj.dim(); ++i) out << ",x" << i;
  out << ",event\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const int j = traj.jump_at(i);
    if (j < 0) {
      write_row(out, traj.time(i), traj.state(i), "");
    } else {
      write_row(out, traj.time(i), traj.state(i), "jump-left");
      write_row(out, traj.time(i), traj.jumps()[static_cast<std::size_t>(j)].right, "jump-right");
    }
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out = open_out(path);
  write_trajectory_csv(out, traj);
  if (!out) throw Error("write failed for " + path.string());
}

CsvTrajectory read_trajectory_csv(std::istream& in) {
  CsvTrajectory out;
  std::string line;
  std::size_t offset = 0;
  if (!std::getline(in, line)) throw ParseError("csv: missing header", 0);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.size() < 3 || header.front() != "t" || header.back() != "event")
    throw ParseError("csv: header must be t,x1,...,xm,event", 0);
  out.dim = header.size() - 2;
  for (std::size_t i = 0; i < out.dim; ++i)
    if (header[i + 1] != "x" + std::to_string(i + 1))
      throw ParseError("csv: unexpected column '" + header[i + 1] + "'", 0);
  offset += line.size() + 1;

  while (std::getline(in, line)) {
    const std::size_t here = offset;
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size())
      throw ParseError("csv: expected " + std::to_string(header.size()) + " fields", here);
    CsvRow row;
    row.t = parse_number(fields[0], here);
    for (std::size_t i = 0; i < out.dim; ++i) row.x.push_back(parse_number(fields[i + 1], here));
    row.event = fields.back();
    if (!row.event.empty() && row.event != "jump-left" && row.event != "jump-right")
      throw ParseError("csv: unknown event '" + row.event + "'", here);
    out.rows.push_back(std::move(row));
  }
  return out;
}

CsvTrajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_trajectory_csv(in);
}

void write_series_csv(const std::filesystem::path& path, const std::string& x_name,
                      const std::string& y_name,
                      const std::vector<std::pair<double, double>>& rows) {
  std::ofstream out = open_out(path);
  out << x_name << ',' << y_name << '\n';
  for (const auto& [x, y] : rows) out << format_double(x) << ',' << format_double(y) << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace impulsive
