#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "impulsive/cli.hpp"
#include "impulsive/csv.hpp"

using namespace impulsive;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(IMPULSIVE_TEST_TMP) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Run {
  int status;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = run_cli(args, out, err);
  return {status, out.str(), err.str()};
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kZeroSystem = R"json({
  "system": {"m": 2, "A": [[0, 0], [0, 0]], "B": [[0, 0], [0, 0]], "f": ["0", "0"], "h": ["0", "0"]},
  "schedule": {"omega": 1.0, "base_thetas": [0.5]},
  "perturbation": {"type": "constant", "value": [0, 0]},
  "integration": {"t0": 0, "t1": 3, "step": 0.1, "x0": [0, 0]}
})json";

}  // namespace

TEST_CASE("check on the built-in example passes") {
  const fs::path dir = scratch("cli_check");
  const Run r = run({"check", "--out", dir.string()});
  CHECK(r.status == kExitOk);
  const auto rep = nlohmann::json::parse(slurp(dir / "hypotheses.json"));
  CHECK(rep["all_hold"] == true);
  CHECK(rep["checks"].size() == 7);
}

TEST_CASE("simulate of the zero system writes zeros") {
  const fs::path dir = scratch("cli_zero");
  write(dir / "zero.json", kZeroSystem);
  const Run r = run({"simulate", "--config", (dir / "zero.json").string(), "--out", dir.string(), "--plot"});
  REQUIRE(r.status == kExitOk);
  const CsvTrajectory csv = read_trajectory_csv(dir / "trajectory.csv");
  CHECK(csv.rows.size() > 30);
  for (const auto& row : csv.rows) {
    CHECK(row.x[0] == 0.0);
    CHECK(row.x[1] == 0.0);
  }
  CHECK(fs::exists(dir / "trajectory.svg"));
  CHECK(fs::exists(dir / "trajectory.meta.json"));

  const Run p = run({"plot", "--input", (dir / "trajectory.csv").string(), "--out", (dir / "plots").string()});
  CHECK(p.status == kExitOk);
  CHECK(fs::exists(dir / "plots" / "trajectory.svg"));
}

TEST_CASE("flags override the configuration") {
  const fs::path dir = scratch("cli_flags");
  write(dir / "zero.json", kZeroSystem);
  const Run r = run({"simulate", "--config", (dir / "zero.json").string(), "--out", dir.string(),
                     "--t0", "1", "--t1", "2", "--x0", "1.5, -2", "--step", "0.25"});
  REQUIRE(r.status == kExitOk);
  const CsvTrajectory csv = read_trajectory_csv(dir / "trajectory.csv");
  CHECK(csv.rows.front().t == 1.0);
  CHECK(csv.rows.back().t == 2.0);
  CHECK(csv.rows.back().x[0] == 1.5);
  CHECK(csv.rows.back().x[1] == -2.0);
}

TEST_CASE("exit codes distinguish errors from hypothesis failures") {
  const fs::path dir = scratch("cli_errors");
  write(dir / "broken.json", "{ \"system\": ");
  const Run broken = run({"check", "--config", (dir / "broken.json").string(), "--out", dir.string()});
  CHECK(broken.status == kExitError);
  CHECK(broken.err.find("line 1") != std::string::npos);

  CHECK(run({"check", "--config", (dir / "missing.json").string()}).status == kExitError);
  CHECK(run({"bogus"}).status == kExitError);
  CHECK(run({"simulate", "--x0", "1,abc", "--out", dir.string()}).status == kExitError);

  // Growing linear part: the averaged matrix is not stable.
  write(dir / "unstable.json", R"json({
    "system": {"m": 1, "A": [[1]], "B": [[0]], "f": ["0"], "h": ["0"]},
    "schedule": {"omega": 1.0, "base_thetas": [0.5]},
    "perturbation": {"type": "constant", "value": [1]},
    "constants": {"lambda": 0.5, "N": 1, "M_f": 1e-12, "M_h": 1e-12, "L_f": 1e-12, "L_h": 1e-12}
  })json");
  const Run bad = run({"check", "--config", (dir / "unstable.json").string(), "--out", dir.string()});
  CHECK(bad.status == kExitHypothesis);
  const Run bounded = run({"bounded", "--config", (dir / "unstable.json").string(), "--out", dir.string()});
  CHECK(bounded.status == kExitHypothesis);
}

TEST_CASE("help exits cleanly") {
  CHECK(run({"--help"}).status == kExitOk);
}
