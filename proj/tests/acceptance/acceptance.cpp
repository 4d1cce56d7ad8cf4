// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit status if
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "impulsive/cli.hpp"
#include "impulsive/config.hpp"
#include "impulsive/csv.hpp"
#include "impulsive/diagnostics.hpp"
#include "impulsive/integrate.hpp"
#include "impulsive/system.hpp"

using namespace impulsive;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

const QuasilinearImpulsiveSystem& example() {
  static const QuasilinearImpulsiveSystem sys = build_system(example_config());
  return sys;
}

SystemConstants published() {
  SystemConstants c;
  c.M_f = 0.4473;
  c.M_h = 0.4803;
  c.L_f = 0.2;
  c.L_h = 0.05;
  c.M_sigma = std::sqrt(84.25);
  c.N = 4.9625;
  c.lambda = 2.5;
  return c;
}

QuasilinearImpulsiveSystem constant_forcing(const QuasilinearImpulsiveSystem& sys, Vector value) {
  return sys.with_perturbation(std::make_shared<VectorSequence>(VectorSequence::constant(value, 1000)));
}

// Largest singular value of a 2x2 matrix in closed form.
double norm2x2(const Matrix& m) {
  const double f = norm_fro(m) * norm_fro(m);
  const double d = std::abs(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0));
  return std::sqrt(0.5 * (f + std::sqrt(std::max(0.0, f * f - 4 * d * d))));
}

// ------------------------------------------------------------------ criteria

Outcome eigenvalue_reproduction() {
  const auto ev = eigenvalues(averaged_matrix(example()));
  const double re = -2.5 - 2 / M_PI * std::log(3.0), im = std::sqrt(15.0) / 2;
  double err = 0;
  for (const auto& z : ev) err = std::max({err, std::abs(z.real() - re), std::abs(std::abs(z.imag()) - im)});
  const bool conj = ev.size() == 2 && ev[0].imag() * ev[1].imag() < 0;
  return {conj && err <= 1e-9, fmt("%.12f +/- %.12fi, max error %.2e", ev[0].real(), std::abs(ev[0].imag()), err)};
}

Outcome hypothesis_suite() {
  const auto rep = check_hypotheses(example(), published());
  const double a5 = rep.get("A5").lhs, a6 = rep.get("A6").lhs, a7 = rep.get("A7").lhs;
  const bool values = std::abs(a5 - 0.8934) <= 0.001 && std::abs(a6 - 1.1336) <= 0.001 &&
                      std::abs(a7 - 0.15) <= 0.001 && rep.get("A6").rhs == 2.5;
  return {rep.all_hold() && values, fmt("A5 %.4f, A6 %.4f, A7 %.4f", a5, a6, a7) +
                                        (rep.all_hold() ? ", all hold" : ", some fail")};
}

Outcome constant_estimation() {
  // The reported values carry the estimator's 1.01 safety factor; they are held
  // to the published constants, the raw sampled sups to the closed forms.
  const auto fc = estimate_function_constants(example());
  const double mf = std::hypot(0.4, 0.2), mh = std::hypot(0.05 * M_PI / 2 + 0.4, 0.04);
  const double ef = std::abs(fc.M_f.value / 0.4473 - 1), eh = std::abs(fc.M_h.value / 0.4803 - 1);
  const double rf = std::abs(fc.M_f.raw / mf - 1), rh = std::abs(fc.M_h.raw / mh - 1);
  return {std::max({ef, eh, rf, rh}) <= 0.01,
          fmt("M_f %.5f (%.2f%% off 0.4473), M_h %.5f (%.2f%% off 0.4803)", fc.M_f.value, 100 * ef,
              fc.M_h.value, 100 * eh) +
              fmt("; raw sups %.2e and %.2e off the closed forms", rf, rh)};
}

Outcome decay_bound_fit() {
  const auto fit = fit_decay_bound(example(), 2.5, 20);
  const double worst = *std::max_element(fit.profile.begin(), fit.profile.end());
  const double r15 = std::sqrt(15.0);
  const Matrix P{{0, 1}, {r15 / 4, 7.0 / 4}};
  const double cond = norm2x2(P) * norm2x2(inverse(P));
  const bool pass = fit.N_fit >= 1 && fit.N_fit <= 4.9625 * 1.001 && worst <= 4.9625 * (1 + 1e-6) &&
                    std::abs(cond - 4.9625) <= 0.001;
  return {pass, fmt("N_fit %.6f, grid max %.6f, cond(P) %.6f", fit.N_fit, worst, cond)};
}

Outcome matriciant_properties() {
  const auto& sys = example();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-10, 20);
  bool identity = true;
  double cocycle = 0;
  for (int i = 0; i < 100; ++i) {
    std::array<double, 3> v{u(rng), u(rng), u(rng)};
    std::sort(v.begin(), v.end());
    const double s = v[0], r = v[1], t = v[2];
    identity = identity && cauchy_matrix(sys, s, s) == Matrix::identity(2);
    const Matrix lhs = cauchy_matrix(sys, t, s), rhs = cauchy_matrix(sys, t, r) * cauchy_matrix(sys, r, s);
    cocycle = std::max(cocycle, max_abs_diff(lhs, rhs));
  }
  const auto lin = constant_forcing(sys, {0, 0}).linear_part();
  const Vector x0{0.3, 0.8};
  const Trajectory traj = integrate(lin, 0, x0, 3 * M_PI, M_PI / 2000);
  double flow = 0;
  for (std::size_t i = 0; i < traj.size(); ++i)
    flow = std::max(flow, dist2(cauchy_matrix(lin, traj.time(i), 0).apply(x0), traj.state(i)));
  return {identity && cocycle <= 1e-9 && flow <= 1e-8,
          fmt("cocycle error %.2e, flow error %.2e", cocycle, flow)};
}

Outcome integrator_order() {
  const auto lin = constant_forcing(example(), {0, 0}).linear_part();
  const Vector x0{0.3, 0.8};
  auto error = [&](double step) {
    const Trajectory traj = integrate(lin, 0, x0, 3 * M_PI, step);
    double e = 0;
    for (std::size_t i = 0; i < traj.size(); ++i)
      e = std::max(e, dist2(cauchy_matrix(lin, traj.time(i), 0).apply(x0), traj.state(i)));
    return e;
  };
  std::vector<double> errs;
  for (double div : {40.0, 80.0, 160.0, 320.0}) errs.push_back(error(M_PI / div));
  bool pass = true;
  std::string detail = "ratios";
  for (std::size_t i = 1; i < errs.size(); ++i) {
    const double ratio = errs[i - 1] / errs[i];
    pass = pass && ratio >= 12 && ratio <= 20;
    detail += fmt(" %.2f", ratio);
  }
  return {pass, detail};
}

Outcome boundedness() {
  const auto& sys = example();
  const auto c = published();
  const auto d = compute_derived_constants(c, sys, std::nullopt);
  const Trajectory phi = bounded_solution(sys, c, 0, 60, 1e-6);
  const double sup = sup_norm(phi), slope = max_interior_slope(phi);
  const double jump = max_jump_law_error(phi, sys);
  const bool pass = std::abs(d.M_phi - 23.877) <= 0.01 && sup <= d.M_phi && slope <= 1.05 * d.R_0 &&
                    jump <= 1e-12 && !phi.jumps().empty();
  return {pass, fmt("sup %.4f <= M_phi %.4f, slope %.3f <= 1.05 R_0 %.3f", sup, d.M_phi, slope, 1.05 * d.R_0) +
                    fmt(", jump-law error %.1e", jump)};
}

Outcome asymptotic_stability() {
  const auto& sys = example();
  const Vector a{0.3, 0.8}, b{1.3, -0.2};
  StabilityOptions opt;
  opt.fit_begin = 5;
  opt.fit_end = 20;
  const auto nl = stability_probe(sys, a, b, 0.6, 20, opt);
  const auto lin = stability_probe(sys.linear_part(), a, b, 0.6, 20, opt);
  return {nl.slope <= -1.0 && std::abs(lin.slope + 3.199) <= 0.05,
          fmt("slope %.4f (nonlinear), %.4f (linear)", nl.slope, lin.slope)};
}

Outcome periodic_control() {
  const auto sys = constant_forcing(example(), {1.0, -2.0});
  const Trajectory phi = bounded_solution(sys, published(), 0, 30, 1e-6);
  const double defect = periodicity_defect(phi, M_PI);
  return {defect <= 2e-6, fmt("periodicity defect %.2e after a %.2f transient", defect, phi.meta.t_transient)};
}

struct WitnessRun {
  WitnessReport witnesses;
  DerivedConstants derived;
  std::vector<std::int64_t> zetas;
  double end = 10;
};

const WitnessRun& witness_run() {
  static const WitnessRun run = [] {
    WitnessRun w;
    const auto& sys = example();
    const auto [start, len] = witness_window(sys.schedule(), 0, 10, 10);
    w.witnesses = find_witnesses(sys.perturbation(), start, len, 5, 0.5);
    w.derived = compute_derived_constants(published(), sys, w.witnesses.delta0_est);
    for (const auto& x : w.witnesses.witnesses) {
      w.zetas.push_back(x.zeta);
      w.end = std::max(w.end, sys.schedule().theta(2 * (x.eta + 1)) + 2 * *w.derived.r);
    }
    return w;
  }();
  return run;
}

Outcome shift_convergence_caps() {
  const auto& sys = example();
  const auto& w = witness_run();
  bool decreasing = w.witnesses.witnesses.size() == 5;
  for (std::size_t i = 1; i < w.witnesses.witnesses.size(); ++i)
    decreasing = decreasing && w.witnesses.witnesses[i].score < w.witnesses.witnesses[i - 1].score;
  const auto ctx = compute_shifted_solutions(sys, published(), w.zetas, 0, 10, 1e-6);
  const auto conv = shift_convergence(sys, w.derived, ctx, 0, 10, 10);
  double ratio = 0;
  for (const auto& e : conv.entries) ratio = std::max(ratio, e.sup_diff / e.cap);
  const auto best = std::min_element(conv.entries.begin(), conv.entries.end(),
                                     [](const auto& a, const auto& b) { return a.score < b.score; });
  return {decreasing && !conv.any_exceeds && conv.best_is_smallest,
          fmt("max sup/cap %.4f, best witness sup %.4f", ratio, best->sup_diff) +
              (conv.best_is_smallest ? " (smallest)" : " (not smallest)")};
}

Outcome separation() {
  const auto& sys = example();
  const auto& w = witness_run();
  const auto ctx = compute_shifted_solutions(sys, published(), w.zetas, 0, w.end, 1e-6);
  const auto sep = separation_scan(sys, w.derived, w.witnesses.witnesses, ctx);
  const auto flat = constant_forcing(sys, {1.0, -2.0});
  const auto ctx_flat = compute_shifted_solutions(flat, published(), w.zetas, 0, w.end, 1e-6);
  const auto sep_flat = separation_scan(flat, w.derived, w.witnesses.witnesses, ctx_flat);
  double worst = 1e300;
  for (const auto& e : sep.entries) worst = std::min(worst, e.inf_diff);
  const bool pass = sep.epsilon_0 > 0 && sep.entries.size() == 5 &&
                    sep.found_count() == sep.entries.size() && sep_flat.found_count() == 0;
  return {pass, fmt("epsilon_0 %.3e, %.0f of 5 found (smallest inf %.3f), constant forcing %.0f found",
                    sep.epsilon_0, static_cast<double>(sep.found_count()), worst,
                    static_cast<double>(sep_flat.found_count()))};
}

// Impulsive Gronwall bound evaluated by brute force: exact ∫b for piecewise-constant
// b and composite Simpson over each continuity segment.
double gronwall_brute(double t1, double t, const std::function<double(double)>& a,
                      const std::vector<double>& b_values, const std::vector<double>& cuts,
                      const std::vector<GronwallImpulse>& imp) {
  // b(s) = b_values[i] on (cuts[i], cuts[i+1]].
  auto b_at = [&](double s) {
    std::size_t i = 0;
    while (i + 1 < cuts.size() && s > cuts[i + 1]) ++i;
    return b_values[i];
  };
  auto int_b = [&](double s) {  // ∫_s^t b
    double total = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double lo = std::max(s, cuts[i]), hi = std::min(t, cuts[i + 1]);
      if (hi > lo) total += b_values[i] * (hi - lo);
    }
    return total;
  };
  auto prod = [&](double s) {  // Π_{s<θ<t}(1+β)
    double p = 1;
    for (const auto& k : imp)
      if (k.theta > s && k.theta < t) p *= 1 + k.beta;
    return p;
  };
  std::vector<double> pts{t1, t};
  for (double c : cuts)
    if (c > t1 && c < t) pts.push_back(c);
  for (const auto& k : imp)
    if (k.theta > t1 && k.theta < t) pts.push_back(k.theta);
  std::sort(pts.begin(), pts.end());
  double integral = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double lo = pts[i], hi = pts[i + 1];
    if (hi <= lo) continue;
    const int n = 4000;
    const double h = (hi - lo) / n;
    const double mid_b = b_at(0.5 * (lo + hi)), mid_p = prod(0.5 * (lo + hi));
    double acc = 0;
    for (int j = 0; j <= n; ++j) {
      const double s = lo + j * h;
      const double w = (j == 0 || j == n) ? 1 : (j % 2 ? 4 : 2);
      acc += w * a(s) * mid_b * mid_p * std::exp(int_b(s));
    }
    integral += acc * h / 3;
  }
  double sum = 0;
  for (const auto& k : imp)
    if (k.theta > t1 && k.theta < t) sum += a(k.theta) * k.beta * prod(k.theta) * std::exp(int_b(k.theta));
  return a(t) + integral + sum;
}

Outcome gronwall_oracle() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const double t1 = 0, t = 1 + 4 * u(rng);
    const double a0 = 0.5 + u(rng), a1 = 0.4 * u(rng), c = 0.5 + 3 * u(rng);
    const auto a = [=](double s) { return a0 + a1 * std::sin(c * s); };
    std::vector<GronwallImpulse> imp;
    std::vector<double> cuts{-1};
    const int count = static_cast<int>(rng() % 6);
    for (int k = 0; k < count; ++k) imp.push_back({t1 + (t - t1) * u(rng), 0.8 * u(rng)});
    std::sort(imp.begin(), imp.end(), [](const auto& x, const auto& y) { return x.theta < y.theta; });
    for (const auto& k : imp) cuts.push_back(k.theta);
    cuts.push_back(t + 1);
    std::vector<double> b_values;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) b_values.push_back(1.5 * u(rng));
    const auto b = [&](double s) {
      std::size_t i = 0;
      while (i + 1 < cuts.size() && s > cuts[i + 1]) ++i;
      return b_values[i];
    };
    const double got = gronwall_bound(t1, t, a, b, imp);
    const double expect = gronwall_brute(t1, t, a, b_values, cuts, imp);
    worst = std::max(worst, std::abs(got / expect - 1));
  }
  double classical = 0;
  for (double t : {0.5, 1.0, 3.0}) {
    const double got = gronwall_bound(0, t, [](double) { return 2.0; }, [](double) { return 0.6; }, {});
    classical = std::max(classical, std::abs(got / (2.0 * std::exp(0.6 * t)) - 1));
  }
  return {worst <= 1e-6 && classical <= 1e-6,
          fmt("max relative error %.2e (random), %.2e (classical)", worst, classical)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome reproduce_determinism() {
  const fs::path root = fs::path(IMPULSIVE_TEST_TMP) / "acceptance";
  fs::remove_all(root);
  std::ostringstream sink;
  const int r1 = run_cli({"reproduce-example", "--out", (root / "a").string()}, sink, sink);
  const int r2 = run_cli({"reproduce-example", "--out", (root / "b").string()}, sink, sink);
  if (r1 != 0 || r2 != 0) return {false, "reproduce-example failed: " + sink.str()};
  bool identical = true;
  int csvs = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    if (entry.path().extension() != ".csv") continue;
    ++csvs;
    identical = identical && slurp(entry.path()) == slurp(root / "b" / entry.path().filename());
  }
  const CsvTrajectory csv = read_trajectory_csv(root / "a" / "trajectory.csv");
  Trajectory traj(csv.dim);
  for (const auto& row : csv.rows) {
    if (row.event == "jump-right") {
      traj.mark_jump(0, row.x);
    } else {
      traj.push(row.t, row.x);
    }
  }
  const double defect = periodicity_defect(traj, M_PI, std::make_pair(10.0, 60.0));
  const double M_phi = nlohmann::json::parse(slurp(root / "a" / "summary.json"))["M_phi"].get<double>();
  const double sup = sup_norm(traj);
  const std::string svg = slurp(root / "a" / "figure.svg");
  const bool two_panels = std::count(svg.begin(), svg.end(), '\n') > 0 &&
                          svg.find("x1") != std::string::npos && svg.find("x2") != std::string::npos;
  return {identical && csvs >= 3 && defect >= 0.05 && sup <= M_phi && two_panels,
          fmt("%.0f CSVs identical, periodicity defect %.3f on [10, 60], sup %.3f <= M_phi %.3f",
              csvs, defect, sup, M_phi)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
    double budget;  ///< seconds, 0 for none
  };
  const Criterion criteria[] = {
      {"eigenvalue reproduction", eigenvalue_reproduction, 1},
      {"hypothesis suite", hypothesis_suite, 1},
      {"constant estimation", constant_estimation, 0},
      {"decay-bound fit", decay_bound_fit, 10},
      {"matriciant properties", matriciant_properties, 0},
      {"integrator order", integrator_order, 0},
      {"boundedness and derivative bound", boundedness, 0},
      {"asymptotic stability", asymptotic_stability, 10},
      {"periodic control case", periodic_control, 0},
      {"shift convergence caps", shift_convergence_caps, 0},
      {"separation windows", separation, 0},
      {"Gronwall oracle", gronwall_oracle, 0},
      {"reproduce-example determinism", reproduce_determinism, 0},
  };
  int failed = 0;
  double separation_total = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (index == 10 || index == 11) separation_total += secs;
    if (c.budget > 0 && secs > c.budget) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s budget", c.budget);
    }
    if (index == 11 && separation_total > 60) {
      o.pass = false;
      o.detail += "; diagnostics exceeded 60 s";
    }
    std::printf("%s %2d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
