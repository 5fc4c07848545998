// Scenario files and machine-readable run reports (JSON). Reports are
// byte-stable for a fixed (scenario, seed); anything nondeterministic such as
// wall time stays on the console.

#pragma once

#include <string>

#include <json.hpp>

#include "idbft/sim/engine.hpp"
#include "idbft/sim/partition.hpp"
#include "idbft/sim/scenario.hpp"

namespace idbft::sim {

inline constexpr const char* kToolVersion = "0.1.0";

// Strict parse: unknown fields, bad types and malformed churn all throw
// ScenarioError.
Scenario scenario_from_json(const nlohmann::json& doc);
Scenario load_scenario_file(const std::string& path);

// Optional scenario-level output path ("output" field), empty if absent.
std::string scenario_output_path(const nlohmann::json& doc);

nlohmann::ordered_json scenario_to_json(const Scenario& s);
nlohmann::ordered_json make_report(const Scenario& s, const RunResult& run);
nlohmann::ordered_json make_partition_report(const Scenario& s,
                                             const PartitionReport& report);

}  // namespace idbft::sim
