#pragma once

// JSON run configuration: the system, its schedule and forcing, constant
// overrides, integration settings and diagnostics settings. The schema is
// documented in README.md.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "impulsive/matops.hpp"
#include "impulsive/system.hpp"

namespace impulsive {

struct PerturbationConfig {
  std::string type = "logistic-lift";  ///< "logistic-lift" or "constant"
  double gamma = 3.95;
  double z0 = 0.23;
  std::size_t length = 100000;
  std::vector<std::string> maps;  ///< expressions in s, one per coordinate
  std::size_t history = 32;       ///< preimages prepended at negative indices
  std::uint64_t history_seed = 1;
  Vector value;                   ///< constant forcing
};

struct ConstantsConfig {
  std::optional<double> lambda, N, M_f, M_h, L_f, L_h, M_sigma, delta0;
  SamplingOptions sampling;
  double fit_horizon = 20;
};

struct IntegrationConfig {
  double step = 0;  ///< 0: ω/2000
  double tol = 1e-6;
  double t0 = 0, t1 = 10;
  Vector x0;        ///< empty: zero state
  std::optional<double> transient;  ///< empty: computed from tol
};

struct DiagnosticsConfig {
  std::optional<std::int64_t> window_start, window_len;  ///< empty: derived from the compact
  int num = 5;
  double delta0_floor = 0.5;
  double compact_a = 0, compact_b = 10;
  int warmup_periods = 10;
  std::optional<double> sample_step;
};

struct RunConfig {
  std::size_t m = 0;
  Matrix A, B;
  std::vector<std::string> f, h;
  double omega = 0;
  std::vector<double> base_thetas;
  PerturbationConfig perturbation;
  ConstantsConfig constants;
  IntegrationConfig integration;
  DiagnosticsConfig diagnostics;
};

/// Parses a JSON document. Syntax errors raise ParseError carrying the byte
/// offset and line/column; schema errors raise DomainError naming the field.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// The two-dimensional example: logistic forcing with Γ = 3.95, z0 = 0.23,
/// impulses at ((−1)^k + πk)/2, x(0.6) = (0.3, 0.8), and the published
/// constants as overrides.
RunConfig example_config();

nlohmann::json to_json(const RunConfig& cfg);

/// Builds the forcing sequence and the system. Expression errors are
/// reported with the field they came from.
std::shared_ptr<const VectorSequence> build_sequence(const RunConfig& cfg);
QuasilinearImpulsiveSystem build_system(const RunConfig& cfg);

struct ResolvedConstants {
  SystemConstants constants;
  std::optional<FunctionConstants> sampled;  ///< present when any sampler value was used
  std::optional<DecayFit> fit;               ///< present when N was fitted
};

/// Fills every constant: overrides first, then the sampler for M_f, M_h,
/// L_f, L_h, the sequence bound for M_σ, the default for λ and the decay
/// fit for N.
ResolvedConstants resolve_constants(const RunConfig& cfg, const QuasilinearImpulsiveSystem& sys);

}  // namespace impulsive
