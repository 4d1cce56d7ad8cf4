#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "example.hpp"
#include "impulsive/csv.hpp"
#include "impulsive/errors.hpp"
#include "impulsive/svg.hpp"

using namespace impulsive;
using impulsive::test::example_system;

namespace {

std::size_t count(const std::string& text, const std::string& what) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(what); pos != std::string::npos; pos = text.find(what, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("17-digit printing re-parses exactly") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("trajectory CSV round trip") {
  const auto& sys = example_system();
  const Trajectory traj = integrate(sys, 0.6, Vector{0.3, 0.8}, 8, M_PI / 200);
  std::stringstream ss;
  write_trajectory_csv(ss, traj);
  const std::string text = ss.str();
  CHECK(text.rfind("t,x1,x2,event\n", 0) == 0);
  CHECK(count(text, ",jump-left\n") == traj.jumps().size());
  CHECK(count(text, ",jump-right\n") == traj.jumps().size());

  const CsvTrajectory csv = read_trajectory_csv(ss);
  CHECK(csv.dim == 2);
  REQUIRE(csv.rows.size() == traj.size() + traj.jumps().size());
  std::size_t row = 0;
  for (std::size_t i = 0; i < traj.size(); ++i, ++row) {
    CHECK(csv.rows[row].t == traj.time(i));
    CHECK(csv.rows[row].x[0] == traj.state(i)[0]);
    CHECK(csv.rows[row].x[1] == traj.state(i)[1]);
    if (traj.jump_at(i) >= 0) {
      CHECK(csv.rows[row].event == "jump-left");
      ++row;
      CHECK(csv.rows[row].event == "jump-right");
      CHECK(csv.rows[row].t == traj.time(i));
      CHECK(csv.rows[row].x[0] == traj.state_after(i)[0]);
    }
  }
}

TEST_CASE("malformed CSV is rejected with an offset") {
  std::stringstream bad("t,x1,event\n0,1,\n0.5,abc,\n");
  try {
    read_trajectory_csv(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 16);
  }
  std::stringstream header("time,x1,event\n");
  CHECK_THROWS_AS(read_trajectory_csv(header), ParseError);
  std::stringstream event("t,x1,event\n0,1,jump\n");
  CHECK_THROWS_AS(read_trajectory_csv(event), ParseError);
}

TEST_CASE("SVG rendering") {
  SUBCASE("single point gives one marker") {
    const std::string svg = render_svg({{"x1", {{1.0, 2.0, false}}}});
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(count(svg, "<circle") == 1);
    CHECK(count(svg, "<polyline") == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
  }
  SUBCASE("constant series is a horizontal line with 10% padding") {
    const std::string svg = render_svg({{"c", {{0, 5, false}, {1, 5, false}, {2, 5, false}}}});
    CHECK(count(svg, "<polyline") == 1);
    // Padding puts the axis at [4.5, 5.5]: the line sits mid-panel.
    SvgOptions opt;
    const double mid = 30 + (opt.panel_height - 70) / 2;
    char buf[32];
    std::snprintf(buf, sizeof buf, ",%.2f", mid);
    CHECK(count(svg, buf) == 3);
  }
  SUBCASE("breaks at jumps") {
    const auto& sys = example_system();
    const Trajectory traj = integrate(sys, 0.6, Vector{0.3, 0.8}, 20, M_PI / 100);
    std::stringstream ss;
    write_trajectory_csv(ss, traj);
    const auto series = series_from_csv(read_trajectory_csv(ss));
    REQUIRE(series.size() == 2);
    const std::string svg = render_svg(series);
    CHECK(count(svg, "<polyline") == 2 * (traj.jumps().size() + 1));
    CHECK(count(svg, "<g>") == 2);
  }
  SUBCASE("invalid input") {
    CHECK_THROWS_AS(render_svg({}), DomainError);
    CHECK_THROWS_AS(render_svg({{"e", {}}}), DomainError);
    CHECK_THROWS_AS(render_svg({{"n", {{0, NAN, false}}}}), DomainError);
  }
}

TEST_CASE("tick positions") {
  const auto ticks = nice_ticks(0.6, 60);
  REQUIRE(!ticks.empty());
  CHECK(ticks.front() >= 0.6);
  CHECK(ticks.back() <= 60);
  CHECK(ticks[1] - ticks[0] == doctest::Approx(10));
}
