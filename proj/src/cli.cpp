#include "impulsive/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "impulsive/config.hpp"
#include "impulsive/csv.hpp"
#include "impulsive/diagnostics.hpp"
#include "impulsive/errors.hpp"
#include "impulsive/integrate.hpp"
#include "impulsive/reports.hpp"
#include "impulsive/svg.hpp"

namespace impulsive {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Flags {
  std::string config;
  std::string out = ".";
  std::string input;
  std::string x0;
  std::optional<double> t0, t1, step, seed_z0;
  bool plot = false;
};

Vector parse_vector(const std::string& text) {
  Vector v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double x = 0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used == 0 || used != item.size() || !std::isfinite(x))
      throw DomainError("--x0: bad number '" + item + "'");
    v.push_back(x);
  }
  if (v.empty()) throw DomainError("--x0: empty vector");
  return v;
}

RunConfig load(const Flags& fl, bool force_example, std::ostream& out) {
  RunConfig cfg;
  if (force_example || fl.config.empty()) {
    if (!force_example) out << "no --config given; using the built-in example\n";
    cfg = example_config();
  } else {
    cfg = load_config(fl.config);
  }
  auto& ic = cfg.integration;
  if (fl.t0) ic.t0 = *fl.t0;
  if (fl.t1) ic.t1 = *fl.t1;
  if (fl.step) ic.step = *fl.step;
  if (!fl.x0.empty()) ic.x0 = parse_vector(fl.x0);
  if (fl.seed_z0) cfg.perturbation.z0 = *fl.seed_z0;
  if (!ic.x0.empty() && ic.x0.size() != cfg.m)
    throw DomainError("x0 has " + std::to_string(ic.x0.size()) + " entries, expected " +
                      std::to_string(cfg.m));
  if (!(ic.t1 > ic.t0)) throw DomainError("integration requires t1 > t0");
  return cfg;
}

fs::path out_dir(const Flags& fl) {
  fs::path dir(fl.out);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f) throw Error("write failed for " + path.string());
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

struct Session {
  RunConfig cfg;
  QuasilinearImpulsiveSystem sys;
  ResolvedConstants rc;
};

Session open_session(RunConfig cfg) {
  QuasilinearImpulsiveSystem sys = build_system(cfg);
  ResolvedConstants rc = resolve_constants(cfg, sys);
  return {std::move(cfg), std::move(sys), std::move(rc)};
}

// ------------------------------------------------------------------ steps

HypothesisReport step_check(const Session& s, const fs::path& dir, std::ostream& out) {
  HypothesisReport rep = check_hypotheses(s.sys, s.rc.constants);
  write_json(dir / "hypotheses.json", to_json(rep));
  for (const auto& h : rep.checks) {
    out << h.id << ' ' << (h.checkable ? (h.holds ? "pass" : "FAIL") : "n/a");
    if (h.checkable) out << "  lhs " << fmt("%.6g", h.lhs) << "  rhs " << fmt("%.6g", h.rhs);
    out << '\n';
  }
  return rep;
}

WitnessReport step_witnesses(const Session& s) {
  const auto& dc = s.cfg.diagnostics;
  std::int64_t start = 0, len = 0;
  if (dc.window_start && dc.window_len) {
    start = *dc.window_start;
    len = *dc.window_len;
  } else {
    std::tie(start, len) =
        witness_window(s.sys.schedule(), dc.compact_a, dc.compact_b, dc.warmup_periods);
    if (dc.window_start) start = *dc.window_start;
    if (dc.window_len) len = *dc.window_len;
  }
  return find_witnesses(s.sys.perturbation(), start, len, dc.num, dc.delta0_floor);
}

struct ConstantsStep {
  DerivedConstants derived;
  std::optional<WitnessReport> witnesses;
};

ConstantsStep step_constants(const Session& s, const fs::path& dir, std::ostream& out) {
  ConstantsStep res;
  std::optional<double> delta0 = s.cfg.constants.delta0;
  std::string delta0_source = "provided";
  if (!delta0) {
    res.witnesses = step_witnesses(s);
    if (res.witnesses->delta0_est > 0) {
      delta0 = res.witnesses->delta0_est;
      delta0_source = "witness search";
    } else {
      delta0_source = "unknown";
    }
  }
  res.derived = compute_derived_constants(s.rc.constants, s.sys, delta0);
  json doc = {{"constants", to_json(s.rc.constants)},
              {"derived", to_json(res.derived)},
              {"delta0_source", delta0_source}};
  if (s.rc.sampled) doc["sampled"] = to_json(*s.rc.sampled);
  if (s.rc.fit) doc["decay_fit"] = to_json(*s.rc.fit);
  write_json(dir / "constants.json", doc);
  const auto& d = res.derived;
  out << "gamma " << fmt("%.6g", d.gamma) << "  K1 " << fmt("%.6g", d.K1) << "  K2 "
      << fmt("%.6g", d.K2) << "  M_phi " << fmt("%.6g", d.M_phi) << "  R_0 " << fmt("%.6g", d.R_0)
      << '\n';
  if (d.delta0)
    out << "delta0 " << fmt("%.6g", *d.delta0) << " (" << delta0_source << ")  H_0 "
        << fmt("%.6g", *d.H_0) << "  epsilon_0 " << fmt("%.6g", *d.epsilon_0) << "  r "
        << fmt("%.6g", *d.r) << '\n';
  else
    out << "delta0 unknown; H_0, epsilon_0 and r omitted\n";
  return res;
}

Vector start_state(const Session& s) {
  return s.cfg.integration.x0.empty() ? Vector(s.cfg.m, 0.0) : s.cfg.integration.x0;
}

void write_plot(const fs::path& csv_path, const fs::path& svg_path, const std::string& title) {
  SvgOptions opt;
  opt.title = title;
  write_text(svg_path, render_svg(series_from_csv(read_trajectory_csv(csv_path)), opt));
}

Trajectory step_simulate(const Session& s, const fs::path& dir, bool plot, std::ostream& out) {
  const auto& ic = s.cfg.integration;
  const double step = ic.step > 0 ? ic.step : s.sys.schedule().omega() / 2000;
  Trajectory traj = integrate(s.sys, ic.t0, start_state(s), ic.t1, step);
  write_trajectory_csv(dir / "trajectory.csv", traj);
  write_json(dir / "trajectory.meta.json", to_json(traj.meta));
  out << "simulated [" << ic.t0 << ", " << ic.t1 << "]: " << traj.size() << " nodes, "
      << traj.jumps().size() << " impulses, sup " << fmt("%.6g", sup_norm(traj)) << '\n';
  if (plot) write_plot(dir / "trajectory.csv", dir / "trajectory.svg", "solution from x(t0) = x0");
  return traj;
}

void step_bounded(const Session& s, const DerivedConstants& derived, const fs::path& dir,
                  std::ostream& out) {
  const auto& ic = s.cfg.integration;
  BoundedOptions opt;
  opt.step = ic.step;
  opt.transient_override = ic.transient;
  const double T_tail = residual_tail_length(s.rc.constants, s.sys, ic.tol);
  const Trajectory wide = bounded_solution(s.sys, s.rc.constants, ic.t0 - T_tail - 1, ic.t1, ic.tol, opt);
  std::vector<double> samples;
  for (int i = 0; i < 10; ++i) samples.push_back(ic.t0 + (ic.t1 - ic.t0) * (i + 0.5) / 10);
  const double residual = integral_equation_residual(wide, s.sys, samples, T_tail);
  Trajectory traj = trim_front(wide, s.sys, ic.t0);
  traj.meta = wide.meta;

  write_trajectory_csv(dir / "bounded.csv", traj);
  write_json(dir / "bounded.meta.json", to_json(traj.meta));
  const double sup = sup_norm(traj), slope = max_interior_slope(traj);
  const double jump_err = max_jump_law_error(traj, s.sys);
  write_json(dir / "residual.json", {{"range", {ic.t0, ic.t1}},
                                     {"tol", ic.tol},
                                     {"tail_length", T_tail},
                                     {"sample_times", samples},
                                     {"residual", residual},
                                     {"sup_norm", sup},
                                     {"M_phi", derived.M_phi},
                                     {"within_M_phi", sup <= derived.M_phi},
                                     {"max_interior_slope", slope},
                                     {"R_0", derived.R_0},
                                     {"max_jump_law_error", jump_err}});
  out << "bounded solution on [" << ic.t0 << ", " << ic.t1 << "]: sup " << fmt("%.6g", sup)
      << " (M_phi " << fmt("%.6g", derived.M_phi) << "), max slope " << fmt("%.6g", slope)
      << " (R_0 " << fmt("%.6g", derived.R_0) << "), residual " << fmt("%.3g", residual) << '\n';
}

void step_diagnose(const Session& s, ConstantsStep cs, const fs::path& dir, std::ostream& out) {
  const auto& dc = s.cfg.diagnostics;
  const WitnessReport wr = cs.witnesses ? *cs.witnesses : step_witnesses(s);
  write_json(dir / "witnesses.json", to_json(wr));
  out << "witnesses: " << wr.witnesses.size() << " (window " << wr.window_start << " + "
      << wr.window_len << "), delta0_est " << fmt("%.6g", wr.delta0_est) << '\n';
  if (wr.warning) out << "warning: " << wr.message << '\n';
  if (wr.witnesses.empty()) {
    out << "no witnesses; convergence and separation reports are empty\n";
    write_json(dir / "convergence.json", json{{"entries", json::array()}});
    write_json(dir / "separation.json", json{{"entries", json::array()}});
    return;
  }

  const auto& sched = s.sys.schedule();
  const DerivedConstants& d = cs.derived;
  const double r = d.r.value_or(0);
  double begin = dc.compact_a, end = dc.compact_b;
  std::vector<std::int64_t> zetas;
  for (const auto& w : wr.witnesses) {
    zetas.push_back(w.zeta);
    begin = std::min(begin, sched.theta(w.eta * sched.p()) - r);
    end = std::max(end, sched.theta((w.eta + 1) * sched.p()) + r);
  }
  begin -= 1e-6;
  end += 1e-6;
  const ShiftedSolutions ctx = compute_shifted_solutions(s.sys, s.rc.constants, zetas, begin, end,
                                                          s.cfg.integration.tol,
                                                          s.cfg.integration.step);

  const ShiftConvergenceReport conv =
      shift_convergence(s.sys, d, ctx, dc.compact_a, dc.compact_b, dc.warmup_periods);
  write_json(dir / "convergence.json", to_json(conv));
  for (std::size_t i = 0; i < conv.entries.size(); ++i) {
    const auto& e = conv.entries[i];
    out << "zeta " << e.zeta << ": score " << fmt("%.6g", e.score) << ", sup diff "
        << fmt("%.6g", e.sup_diff) << ", cap " << fmt("%.6g", e.cap)
        << (e.exceeds ? "  EXCEEDS" : "") << '\n';
    std::vector<std::pair<double, double>> rows;
    for (std::size_t j = ctx.base.locate(dc.compact_a); j < ctx.base.size(); ++j) {
      const double t = ctx.base.time(j);
      if (t > dc.compact_b) break;
      if (t >= dc.compact_a) rows.emplace_back(t, ctx.difference(s.sys, i, t));
    }
    write_series_csv(dir / ("shift_" + std::to_string(e.zeta) + ".csv"), "t", "difference", rows);
  }
  if (!d.r) {
    out << "delta0 unknown; separation scan skipped\n";
    write_json(dir / "separation.json", json{{"entries", json::array()}});
    return;
  }
  const SeparationReport sep = separation_scan(s.sys, d, wr.witnesses, ctx, dc.sample_step);
  write_json(dir / "separation.json", to_json(sep));
  out << "separation: " << sep.found_count() << " of " << sep.entries.size()
      << " windows with inf >= epsilon_0 = " << fmt("%.6g", sep.epsilon_0) << '\n';
}

// ------------------------------------------------------------------ commands

int cmd_check(const Flags& fl, std::ostream& out) {
  const Session s = open_session(load(fl, false, out));
  const HypothesisReport rep = step_check(s, out_dir(fl), out);
  return rep.all_hold() ? kExitOk : kExitHypothesis;
}

int cmd_constants(const Flags& fl, std::ostream& out) {
  const Session s = open_session(load(fl, false, out));
  step_constants(s, out_dir(fl), out);
  return kExitOk;
}

int cmd_simulate(const Flags& fl, std::ostream& out) {
  RunConfig cfg = load(fl, false, out);
  QuasilinearImpulsiveSystem sys = build_system(cfg);
  const Session s{std::move(cfg), std::move(sys), {}};
  step_simulate(s, out_dir(fl), fl.plot, out);
  return kExitOk;
}

int cmd_bounded(const Flags& fl, std::ostream& out) {
  const Session s = open_session(load(fl, false, out));
  const fs::path dir = out_dir(fl);
  const DerivedConstants d = compute_derived_constants(s.rc.constants, s.sys, std::nullopt);
  step_bounded(s, d, dir, out);
  if (fl.plot) write_plot(dir / "bounded.csv", dir / "bounded.svg", "bounded solution");
  return kExitOk;
}

int cmd_diagnose(const Flags& fl, std::ostream& out) {
  const Session s = open_session(load(fl, false, out));
  const fs::path dir = out_dir(fl);
  step_diagnose(s, step_constants(s, dir, out), dir, out);
  return kExitOk;
}

int cmd_reproduce(const Flags& fl, std::ostream& out) {
  if (!fl.config.empty()) out << "reproduce-example ignores --config\n";
  const Session s = open_session(load(fl, true, out));
  const fs::path dir = out_dir(fl);
  const HypothesisReport rep = step_check(s, dir, out);
  if (!rep.all_hold()) return kExitHypothesis;
  ConstantsStep cs = step_constants(s, dir, out);
  const Trajectory traj = step_simulate(s, dir, false, out);
  step_bounded(s, cs.derived, dir, out);
  const DerivedConstants derived = cs.derived;
  step_diagnose(s, std::move(cs), dir, out);

  SvgOptions opt;
  opt.title = "solution from x(" + fmt("%g", s.cfg.integration.t0) + ") = (" +
              fmt("%g", start_state(s)[0]) + ", " + fmt("%g", start_state(s)[1]) + ")";
  write_text(dir / "figure.svg",
             render_svg(series_from_csv(read_trajectory_csv(dir / "trajectory.csv")), opt));

  const double omega = s.sys.schedule().omega();
  const double a = std::max(10.0, s.cfg.integration.t0);
  const double defect = periodicity_defect(traj, omega, std::make_pair(a, s.cfg.integration.t1));
  const double sup = sup_norm(traj);
  write_json(dir / "summary.json", {{"range", {s.cfg.integration.t0, s.cfg.integration.t1}},
                                    {"sup_norm", sup},
                                    {"M_phi", derived.M_phi},
                                    {"periodicity_defect", defect},
                                    {"periodicity_window", {a, s.cfg.integration.t1}},
                                    {"config", to_json(s.cfg)}});
  out << "periodicity defect on [" << a << ", " << s.cfg.integration.t1 << "]: "
      << fmt("%.6g", defect) << '\n';
  out << "artifacts written to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_plot(const Flags& fl, std::ostream& out) {
  if (fl.input.empty()) throw DomainError("plot requires --input <csv>");
  const fs::path in(fl.input);
  const fs::path target = out_dir(fl) / (in.stem().string() + ".svg");
  write_plot(in, target, in.filename().string());
  out << "wrote " << target.string() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulate and analyse impulsive systems with unpredictable forcing", "impulsive"};
  app.require_subcommand(1);
  Flags fl;

  auto common = [&](CLI::App* sub, bool with_integration) {
    sub->add_option("--config", fl.config, "JSON run configuration (default: built-in example)");
    sub->add_option("--out", fl.out, "output directory")->capture_default_str();
    sub->add_option("--seed-z0", fl.seed_z0, "initial value of the logistic orbit");
    if (with_integration) {
      sub->add_option("--t0", fl.t0, "start time");
      sub->add_option("--t1", fl.t1, "end time");
      sub->add_option("--x0", fl.x0, "initial state \"v1,...,vm\"");
      sub->add_option("--step", fl.step, "integration step");
      sub->add_flag("--plot", fl.plot, "also write an SVG plot");
    }
  };
  auto* check = app.add_subcommand("check", "evaluate hypotheses (A1)-(A7)");
  common(check, false);
  auto* constants = app.add_subcommand("constants", "resolve and derive all constants");
  common(constants, false);
  auto* simulate = app.add_subcommand("simulate", "integrate from (t0, x0) to t1");
  common(simulate, true);
  auto* bounded = app.add_subcommand("bounded", "bounded solution and its integral-equation residual");
  common(bounded, true);
  auto* diagnose = app.add_subcommand("diagnose", "witness search, shift convergence and separation");
  common(diagnose, true);
  auto* reproduce = app.add_subcommand("reproduce-example", "run the built-in two-dimensional example");
  common(reproduce, true);
  auto* plot = app.add_subcommand("plot", "render a trajectory CSV as SVG");
  plot->add_option("--input", fl.input, "trajectory CSV")->required();
  plot->add_option("--out", fl.out, "output directory")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (check->parsed()) return cmd_check(fl, out);
    if (constants->parsed()) return cmd_constants(fl, out);
    if (simulate->parsed()) return cmd_simulate(fl, out);
    if (bounded->parsed()) return cmd_bounded(fl, out);
    if (diagnose->parsed()) return cmd_diagnose(fl, out);
    if (reproduce->parsed()) return cmd_reproduce(fl, out);
    if (plot->parsed()) return cmd_plot(fl, out);
  } catch (const HypothesisError& e) {
    err << "hypothesis failure: " << e.what() << '\n';
    return kExitHypothesis;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace impulsive
