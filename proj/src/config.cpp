#include "impulsive/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "impulsive/errors.hpp"
#include "impulsive/expr.hpp"
#include "impulsive/signals.hpp"

namespace impulsive {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw DomainError("config " + path + ": " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "/" + key, "missing");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) schema_error(path, "not finite");
  return x;
}

std::int64_t integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) schema_error(path, "expected an integer");
  return v.get<std::int64_t>();
}

std::size_t count(const json& v, const std::string& path) {
  const std::int64_t n = integer(v, path);
  if (n < 0) schema_error(path, "must be non-negative");
  return static_cast<std::size_t>(n);
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) schema_error(path, "expected a string");
  return v.get<std::string>();
}

Vector vec(const json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array of numbers");
  Vector out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "/" + std::to_string(i)));
  return out;
}

std::vector<std::string> strings(const json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(text(v[i], path + "/" + std::to_string(i)));
  return out;
}

Matrix matrix(const json& v, std::size_t m, const std::string& path) {
  if (!v.is_array() || v.size() != m) schema_error(path, "expected " + std::to_string(m) + " rows");
  Matrix out(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::string row = path + "/" + std::to_string(i);
    const Vector r = vec(v[i], row);
    if (r.size() != m) schema_error(row, "expected " + std::to_string(m) + " entries");
    for (std::size_t j = 0; j < m; ++j) out(i, j) = r[j];
  }
  return out;
}

template <class T, class F>
void optional_field(const json& obj, const char* key, const std::string& path, T& dst, F read) {
  if (!obj.is_object()) return;
  auto it = obj.find(key);
  if (it != obj.end() && !it->is_null()) dst = read(*it, path + "/" + key);
}

void reject_unknown(const json& obj, std::initializer_list<const char*> keys,
                    const std::string& path) {
  if (!obj.is_object()) schema_error(path.empty() ? "/" : path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) schema_error(path + "/" + it.key(), "unknown field");
  }
}

std::string line_col(std::string_view text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

RunConfig parse_config(std::string_view text_in) {
  json doc;
  try {
    doc = json::parse(text_in.begin(), text_in.end());
  } catch (const json::parse_error& e) {
    const std::size_t offset = e.byte == 0 ? 0 : e.byte - 1;
    throw ParseError("config: malformed JSON at " + line_col(text_in, offset), offset);
  }
  reject_unknown(doc, {"system", "schedule", "perturbation", "constants", "integration",
                       "diagnostics"},
                 "");
  RunConfig cfg;

  const json& sys = require(doc, "system", "");
  reject_unknown(sys, {"m", "A", "B", "f", "h"}, "/system");
  cfg.m = count(require(sys, "m", "/system"), "/system/m");
  if (cfg.m == 0 || cfg.m > Tolerances::kMaxDim) schema_error("/system/m", "must be in [1, 64]");
  cfg.A = matrix(require(sys, "A", "/system"), cfg.m, "/system/A");
  cfg.B = matrix(require(sys, "B", "/system"), cfg.m, "/system/B");
  cfg.f = strings(require(sys, "f", "/system"), "/system/f");
  cfg.h = strings(require(sys, "h", "/system"), "/system/h");
  if (cfg.f.size() != cfg.m) schema_error("/system/f", "expected m expressions");
  if (cfg.h.size() != cfg.m) schema_error("/system/h", "expected m expressions");

  const json& sch = require(doc, "schedule", "");
  reject_unknown(sch, {"omega", "base_thetas"}, "/schedule");
  cfg.omega = number(require(sch, "omega", "/schedule"), "/schedule/omega");
  cfg.base_thetas = vec(require(sch, "base_thetas", "/schedule"), "/schedule/base_thetas");

  const json& per = require(doc, "perturbation", "");
  auto& pc = cfg.perturbation;
  pc.type = text(require(per, "type", "/perturbation"), "/perturbation/type");
  if (pc.type == "logistic-lift") {
    reject_unknown(per, {"type", "gamma", "z0", "length", "maps", "history", "history_seed"},
                   "/perturbation");
    pc.gamma = number(require(per, "gamma", "/perturbation"), "/perturbation/gamma");
    pc.z0 = number(require(per, "z0", "/perturbation"), "/perturbation/z0");
    pc.maps = strings(require(per, "maps", "/perturbation"), "/perturbation/maps");
    if (pc.maps.size() != cfg.m) schema_error("/perturbation/maps", "expected m expressions");
    optional_field(per, "length", "/perturbation", pc.length, count);
    optional_field(per, "history", "/perturbation", pc.history, count);
    optional_field(per, "history_seed", "/perturbation", pc.history_seed,
                   [](const json& v, const std::string& p) { return static_cast<std::uint64_t>(count(v, p)); });
  } else if (pc.type == "constant") {
    reject_unknown(per, {"type", "value", "length"}, "/perturbation");
    pc.value = vec(require(per, "value", "/perturbation"), "/perturbation/value");
    if (pc.value.size() != cfg.m) schema_error("/perturbation/value", "expected m entries");
    optional_field(per, "length", "/perturbation", pc.length, count);
  } else {
    schema_error("/perturbation/type", "expected \"logistic-lift\" or \"constant\"");
  }

  if (auto it = doc.find("constants"); it != doc.end()) {
    const json& c = *it;
    reject_unknown(c, {"lambda", "N", "M_f", "M_h", "L_f", "L_h", "M_sigma", "delta0",
                       "sampling", "fit_horizon"},
                   "/constants");
    auto& cc = cfg.constants;
    auto num = [](const json& v, const std::string& p) { return std::optional<double>(number(v, p)); };
    optional_field(c, "lambda", "/constants", cc.lambda, num);
    optional_field(c, "N", "/constants", cc.N, num);
    optional_field(c, "M_f", "/constants", cc.M_f, num);
    optional_field(c, "M_h", "/constants", cc.M_h, num);
    optional_field(c, "L_f", "/constants", cc.L_f, num);
    optional_field(c, "L_h", "/constants", cc.L_h, num);
    optional_field(c, "M_sigma", "/constants", cc.M_sigma, num);
    optional_field(c, "delta0", "/constants", cc.delta0, num);
    optional_field(c, "fit_horizon", "/constants", cc.fit_horizon, number);
    if (auto s = c.find("sampling"); s != c.end()) {
      reject_unknown(*s, {"halfwidth", "points_per_axis", "t_points", "max_points"},
                     "/constants/sampling");
      const std::string p = "/constants/sampling";
      optional_field(*s, "halfwidth", p, cc.sampling.halfwidth, number);
      optional_field(*s, "points_per_axis", p, cc.sampling.points_per_axis, count);
      optional_field(*s, "t_points", p, cc.sampling.t_points, count);
      optional_field(*s, "max_points", p, cc.sampling.max_points, count);
    }
  }

  if (auto it = doc.find("integration"); it != doc.end()) {
    const json& in = *it;
    reject_unknown(in, {"step", "tol", "t0", "t1", "x0", "transient"}, "/integration");
    auto& ic = cfg.integration;
    const std::string p = "/integration";
    optional_field(in, "step", p, ic.step, number);
    optional_field(in, "tol", p, ic.tol, number);
    optional_field(in, "t0", p, ic.t0, number);
    optional_field(in, "t1", p, ic.t1, number);
    optional_field(in, "x0", p, ic.x0, vec);
    if (auto tr = in.find("transient"); tr != in.end() && !tr->is_null()) {
      if (tr->is_string()) {
        if (tr->get<std::string>() != "auto") schema_error(p + "/transient", "expected \"auto\" or a number");
      } else {
        ic.transient = number(*tr, p + "/transient");
      }
    }
    if (!ic.x0.empty() && ic.x0.size() != cfg.m) schema_error(p + "/x0", "expected m entries");
  }

  if (auto it = doc.find("diagnostics"); it != doc.end()) {
    const json& d = *it;
    reject_unknown(d, {"window_start", "window_len", "num", "delta0_floor", "compact",
                       "warmup_periods", "sample_step"},
                   "/diagnostics");
    auto& dc = cfg.diagnostics;
    const std::string p = "/diagnostics";
    auto i64 = [](const json& v, const std::string& q) { return std::optional<std::int64_t>(integer(v, q)); };
    optional_field(d, "window_start", p, dc.window_start, i64);
    optional_field(d, "window_len", p, dc.window_len, i64);
    optional_field(d, "num", p, dc.num,
                   [](const json& v, const std::string& q) { return static_cast<int>(integer(v, q)); });
    optional_field(d, "delta0_floor", p, dc.delta0_floor, number);
    optional_field(d, "warmup_periods", p, dc.warmup_periods,
                   [](const json& v, const std::string& q) { return static_cast<int>(integer(v, q)); });
    optional_field(d, "sample_step", p, dc.sample_step,
                   [](const json& v, const std::string& q) { return std::optional<double>(number(v, q)); });
    if (auto c = d.find("compact"); c != d.end()) {
      const Vector ab = vec(*c, p + "/compact");
      if (ab.size() != 2 || !(ab[1] > ab[0])) schema_error(p + "/compact", "expected [a, b] with a < b");
      dc.compact_a = ab[0];
      dc.compact_b = ab[1];
    }
    if (dc.num < 1) schema_error(p + "/num", "must be positive");
    if (dc.warmup_periods < 0) schema_error(p + "/warmup_periods", "must be non-negative");
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

RunConfig example_config() {
  RunConfig cfg;
  cfg.m = 2;
  cfg.A = Matrix{{-6, 2}, {-8, 1}};
  cfg.B = Matrix::scalar(2, -2.0 / 3);
  cfg.f = {"0.1*cos(x2) + 0.3*sin(2*t)", "0.2*tanh(x1)"};
  cfg.h = {"0.05*arctan(x1) + 0.4", "0.04*sin(x2)"};
  cfg.omega = M_PI;
  cfg.base_thetas = {0.5, (M_PI - 1) / 2};
  auto& pc = cfg.perturbation;
  pc.type = "logistic-lift";
  pc.gamma = 3.95;
  pc.z0 = 0.23;
  pc.length = 100000;
  pc.maps = {"4.5*s", "(s + 1)^3"};
  pc.history = 32;
  pc.history_seed = 1;
  auto& cc = cfg.constants;
  cc.lambda = 2.5;
  cc.N = 4.9625;
  cc.M_f = 0.4473;
  cc.M_h = 0.4803;
  cc.L_f = 0.2;
  cc.L_h = 0.05;
  cc.M_sigma = std::sqrt(84.25);
  auto& ic = cfg.integration;
  ic.step = 0;
  ic.tol = 1e-6;
  ic.t0 = 0.6;
  ic.t1 = 60;
  ic.x0 = {0.3, 0.8};
  return cfg;
}

json to_json(const RunConfig& cfg) {
  auto rows = [](const Matrix& M) {
    json out = json::array();
    for (std::size_t i = 0; i < M.dim(); ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < M.dim(); ++j) row.push_back(M(i, j));
      out.push_back(row);
    }
    return out;
  };
  json j;
  j["system"] = {{"m", cfg.m}, {"A", rows(cfg.A)}, {"B", rows(cfg.B)}, {"f", cfg.f}, {"h", cfg.h}};
  j["schedule"] = {{"omega", cfg.omega}, {"base_thetas", cfg.base_thetas}};
  const auto& pc = cfg.perturbation;
  if (pc.type == "constant") {
    j["perturbation"] = {{"type", pc.type}, {"value", pc.value}, {"length", pc.length}};
  } else {
    j["perturbation"] = {{"type", pc.type},       {"gamma", pc.gamma},
                         {"z0", pc.z0},           {"length", pc.length},
                         {"maps", pc.maps},       {"history", pc.history},
                         {"history_seed", pc.history_seed}};
  }
  const auto& cc = cfg.constants;
  j["constants"] = {{"lambda", opt(cc.lambda)},
                    {"N", opt(cc.N)},
                    {"M_f", opt(cc.M_f)},
                    {"M_h", opt(cc.M_h)},
                    {"L_f", opt(cc.L_f)},
                    {"L_h", opt(cc.L_h)},
                    {"M_sigma", opt(cc.M_sigma)},
                    {"delta0", opt(cc.delta0)},
                    {"fit_horizon", cc.fit_horizon},
                    {"sampling",
                     {{"halfwidth", cc.sampling.halfwidth},
                      {"points_per_axis", cc.sampling.points_per_axis},
                      {"t_points", cc.sampling.t_points},
                      {"max_points", cc.sampling.max_points}}}};
  const auto& ic = cfg.integration;
  j["integration"] = {{"step", ic.step}, {"tol", ic.tol}, {"t0", ic.t0}, {"t1", ic.t1},
                      {"x0", ic.x0},     {"transient", ic.transient ? json(*ic.transient) : json("auto")}};
  const auto& dc = cfg.diagnostics;
  j["diagnostics"] = {{"num", dc.num},
                      {"delta0_floor", dc.delta0_floor},
                      {"compact", {dc.compact_a, dc.compact_b}},
                      {"warmup_periods", dc.warmup_periods},
                      {"window_start", dc.window_start ? json(*dc.window_start) : json(nullptr)},
                      {"window_len", dc.window_len ? json(*dc.window_len) : json(nullptr)},
                      {"sample_step", opt(dc.sample_step)}};
  return j;
}

namespace {

std::vector<Expression> parse_all(const std::vector<std::string>& src, const std::string& path) {
  std::vector<Expression> out;
  for (std::size_t i = 0; i < src.size(); ++i) {
    try {
      out.push_back(parse(src[i]));
    } catch (const ParseError& e) {
      throw ParseError("config " + path + "/" + std::to_string(i) + ": " + e.what(), e.offset());
    }
  }
  return out;
}

}  // namespace

std::shared_ptr<const VectorSequence> build_sequence(const RunConfig& cfg) {
  const auto& pc = cfg.perturbation;
  if (pc.type == "constant") {
    if (pc.value.size() != cfg.m) schema_error("/perturbation/value", "expected m entries");
    return std::make_shared<VectorSequence>(VectorSequence::constant(pc.value, std::max<std::size_t>(pc.length, 1)));
  }
  const std::vector<Expression> maps = parse_all(pc.maps, "/perturbation/maps");
  for (std::size_t i = 0; i < maps.size(); ++i)
    require_variables(maps[i], false, true, 0, "perturbation map " + std::to_string(i + 1));
  const ScalarOrbit orbit = logistic_orbit(pc.gamma, pc.z0, pc.length);
  const std::vector<double> history =
      pc.history > 0 ? logistic_history(pc.gamma, pc.z0, pc.history, pc.history_seed)
                     : std::vector<double>{};
  return std::make_shared<VectorSequence>(lift_sequence(orbit, maps, history));
}

QuasilinearImpulsiveSystem build_system(const RunConfig& cfg) {
  return QuasilinearImpulsiveSystem(cfg.A, cfg.B, parse_all(cfg.f, "/system/f"),
                                    parse_all(cfg.h, "/system/h"),
                                    ImpulseSchedule(cfg.omega, cfg.base_thetas),
                                    build_sequence(cfg));
}

ResolvedConstants resolve_constants(const RunConfig& cfg, const QuasilinearImpulsiveSystem& sys) {
  const auto& cc = cfg.constants;
  ResolvedConstants out;
  SystemConstants& c = out.constants;

  if (!cc.M_f || !cc.M_h || !cc.L_f || !cc.L_h)
    out.sampled = estimate_function_constants(sys, cc.sampling);
  auto pick = [&](const char* name, const std::optional<double>& given,
                  const ConstantEstimate* est, double& dst) {
    if (given) {
      dst = *given;
      c.source[name] = ConstantSource::Provided;
    } else {
      dst = est->value;
      c.source[name] = ConstantSource::Estimated;
    }
  };
  const FunctionConstants* s = out.sampled ? &*out.sampled : nullptr;
  pick("M_f", cc.M_f, s ? &s->M_f : nullptr, c.M_f);
  pick("M_h", cc.M_h, s ? &s->M_h : nullptr, c.M_h);
  pick("L_f", cc.L_f, s ? &s->L_f : nullptr, c.L_f);
  pick("L_h", cc.L_h, s ? &s->L_h : nullptr, c.L_h);

  if (cc.M_sigma) {
    c.M_sigma = *cc.M_sigma;
    c.source["M_sigma"] = ConstantSource::Provided;
  } else {
    c.M_sigma = std::max(sys.perturbation().m_sigma(), Tolerances::kConstantFloor);
    c.source["M_sigma"] = ConstantSource::Estimated;
  }
  if (cc.lambda) {
    c.lambda = *cc.lambda;
    c.source["lambda"] = ConstantSource::Provided;
  } else {
    c.lambda = default_lambda(sys);
    c.source["lambda"] = ConstantSource::Default;
  }
  if (cc.N) {
    c.N = *cc.N;
    c.source["N"] = ConstantSource::Provided;
  } else {
    out.fit = fit_decay_bound(sys, c.lambda, cc.fit_horizon);
    c.N = out.fit->N_fit;
    c.source["N"] = ConstantSource::Fitted;
  }
  c.validate();
  return out;
}

}  // namespace impulsive
