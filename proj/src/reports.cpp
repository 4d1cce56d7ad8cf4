#include "impulsive/reports.hpp"

#include <fstream>

#include "impulsive/errors.hpp"

namespace impulsive {

using nlohmann::json;

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json to_json(const SystemConstants& c) {
  json sources = json::object();
  for (const auto& [name, src] : c.source) sources[name] = to_string(src);
  return {{"M_f", c.M_f},         {"M_h", c.M_h}, {"L_f", c.L_f},         {"L_h", c.L_h},
          {"M_sigma", c.M_sigma}, {"N", c.N},     {"lambda", c.lambda}, {"source", sources}};
}

json to_json(const FunctionConstants& c) {
  auto est = [](const ConstantEstimate& e) {
    return json{{"raw", e.raw}, {"value", e.value}, {"floored", e.floored}};
  };
  return {{"M_f", est(c.M_f)},
          {"M_h", est(c.M_h)},
          {"L_f", est(c.L_f)},
          {"L_h", est(c.L_h)},
          {"points_per_axis", c.points_per_axis},
          {"t_points", c.t_points},
          {"halfwidth", c.halfwidth}};
}

json to_json(const DecayFit& fit) {
  return {{"N_fit", fit.N_fit},
          {"lambda", fit.lambda},
          {"horizon", fit.horizon},
          {"s_points", fit.s_grid.size()},
          {"tau_points", fit.tau_grid.size()}};
}

json to_json(const HypothesisReport& rep) {
  json checks = json::array();
  for (const auto& h : rep.checks) {
    json details = json::object();
    for (const auto& [k, v] : h.details) details[k] = v;
    json entry = {{"id", h.id},   {"statement", h.statement}, {"checkable", h.checkable},
                  {"holds", h.holds}, {"lhs", h.lhs},          {"rhs", h.rhs},
                  {"details", details}};
    if (!h.note.empty()) entry["note"] = h.note;
    checks.push_back(entry);
  }
  json eig = json::array();
  for (const auto& z : rep.eigenvalues) eig.push_back({{"re", z.real()}, {"im", z.imag()}});
  return {{"all_hold", rep.all_hold()},
          {"checks", checks},
          {"constants", to_json(rep.constants)},
          {"eigenvalues", eig}};
}

json to_json(const DerivedConstants& d) {
  return {{"gamma", d.gamma},
          {"K1", d.K1},
          {"K2", d.K2},
          {"M_phi", d.M_phi},
          {"R_0", d.R_0},
          {"theta_bar", d.theta_bar},
          {"delta0", opt(d.delta0)},
          {"H_0", opt(d.H_0)},
          {"epsilon_0", opt(d.epsilon_0)},
          {"r", opt(d.r)},
          {"norms",
           {{"A", d.norm_A}, {"B", d.norm_B}, {"I_plus_B", d.norm_jump},
            {"I_plus_B_inverse", d.norm_jump_inv}}}};
}

json to_json(const WitnessReport& rep) {
  json ws = json::array();
  for (const auto& w : rep.witnesses)
    ws.push_back({{"zeta", w.zeta}, {"score", w.score}, {"eta", w.eta}, {"separation", w.separation}});
  json out = {{"witnesses", ws},
              {"delta0_est", rep.delta0_est},
              {"window_start", rep.window_start},
              {"window_len", rep.window_len},
              {"delta0_floor", rep.delta0_floor},
              {"warning", rep.warning}};
  if (!rep.message.empty()) out["message"] = rep.message;
  return out;
}

json to_json(const ShiftConvergenceReport& rep) {
  json es = json::array();
  for (const auto& e : rep.entries)
    es.push_back({{"zeta", e.zeta},         {"mu", e.mu},   {"score", e.score},
                  {"sup_diff", e.sup_diff}, {"cap", e.cap}, {"exceeds", e.exceeds}});
  return {{"compact", {rep.a, rep.b}},
          {"warmup_periods", rep.J},
          {"window_start", rep.window_start},
          {"window_len", rep.window_len},
          {"K1", rep.K1},
          {"K2", rep.K2},
          {"gamma", rep.gamma},
          {"entries", es},
          {"any_exceeds", rep.any_exceeds},
          {"best_is_smallest", rep.best_is_smallest}};
}

json to_json(const SeparationReport& rep) {
  json es = json::array();
  for (const auto& e : rep.entries) {
    json entry = {{"zeta", e.zeta},
                  {"eta", e.eta},
                  {"mu", e.mu},
                  {"scan", {e.scan_begin, e.scan_end}},
                  {"coarse_max", e.coarse_max},
                  {"found", e.found},
                  {"best_tau", e.tau},
                  {"best_inf", e.inf_diff}};
    entry["tau"] = e.found ? json(e.tau) : json(nullptr);
    es.push_back(entry);
  }
  return {{"r", rep.r},
          {"epsilon_0", rep.epsilon_0},
          {"sample_step", rep.sample_step},
          {"found", rep.found_count()},
          {"entries", es}};
}

json to_json(const StabilityResult& res) {
  return {{"slope", res.slope},         {"degenerate", res.degenerate},
          {"underflow", res.underflow}, {"samples", res.samples},
          {"fit_window", {res.fit_begin, res.fit_end}}};
}

json to_json(const TrajectoryMeta& meta) {
  json out = {{"step", meta.step},
              {"system_fingerprint", meta.system_fingerprint},
              {"extension_policy", meta.extension_policy},
              {"start_convention", meta.start_convention},
              {"end_convention", meta.end_convention}};
  if (meta.t_transient > 0) out["t_transient"] = meta.t_transient;
  if (meta.tol > 0) out["tol"] = meta.tol;
  return out;
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace impulsive
