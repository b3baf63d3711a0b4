#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "regulib/closed_loop.hpp"

namespace regulib {

using Json = nlohmann::json;

struct ProbeConfig {
  std::string gain = "k";
  std::size_t max_doublings = 11;
  std::optional<double> floor;
};

/// Contents of a run configuration document:
///
///   { "scenario": "harmonic1",
///     "set": { "k": 20, "rho": [1.1], "X0": [[0.0]] },
///     "out": "results",
///     "analyses": ["mato", "sigma", "pe"],
///     "probe": { "gain": "k", "max_doublings": 11, "floor": 0.01 } }
///
/// Every key is optional; unknown keys are rejected.
struct RunConfig {
  std::string scenario = "harmonic1";
  Json overrides = Json::object();
  std::string out = ".";
  std::optional<std::vector<std::string>> analyses;
  ProbeConfig probe;
};

RunConfig parse_config(const Json& doc);
RunConfig load_config(const std::string& path);

/// Splits "key=value"; the value is read as JSON, or as a bare string if that fails.
std::pair<std::string, Json> parse_assignment(const std::string& text);

/// Names accepted in "set" and by --set.
const std::vector<std::string>& override_keys();

/// Applies overrides, re-derives the regulator and validates the result.
/// Throws ConfigError for unknown keys or ill-typed values; synthesis and
/// validation errors propagate unchanged.
Scenario apply_overrides(Scenario s, const Json& overrides);

/// Every effective parameter of the scenario, in the override vocabulary plus
/// the "scenario" key. Feeding it back reproduces the scenario bit for bit.
Json parameter_echo(const Scenario& s);
Scenario scenario_from_parameters(const Json& echo);

/// Registry scenario with the configured overrides applied.
Scenario scenario_from_config(const RunConfig& cfg);

}  // namespace regulib
