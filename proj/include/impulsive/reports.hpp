#pragma once

// JSON renderings of the library's result records.

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "impulsive/diagnostics.hpp"
#include "impulsive/integrate.hpp"
#include "impulsive/signals.hpp"
#include "impulsive/system.hpp"

namespace impulsive {

nlohmann::json to_json(const SystemConstants& c);
nlohmann::json to_json(const FunctionConstants& c);
/// Summary only: N_fit, λ, horizon and grid sizes.
nlohmann::json to_json(const DecayFit& fit);
nlohmann::json to_json(const HypothesisReport& rep);
nlohmann::json to_json(const DerivedConstants& d);
nlohmann::json to_json(const WitnessReport& rep);
nlohmann::json to_json(const ShiftConvergenceReport& rep);
nlohmann::json to_json(const SeparationReport& rep);
nlohmann::json to_json(const StabilityResult& res);
nlohmann::json to_json(const TrajectoryMeta& meta);

/// Writes `doc` indented by two spaces with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace impulsive
