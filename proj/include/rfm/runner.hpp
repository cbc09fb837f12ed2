#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace rfm {

// A config file is one flat JSON object: "experiment", "seed", an optional
// "output_dir", and the experiment's own fields (kept verbatim in params).
struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  std::optional<std::string> output_dir;
  nlohmann::json params = nlohmann::json::object();

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  bool operator==(const ExperimentConfig&) const = default;
};

struct CheckResult {
  std::string name;
  bool passed;
  std::string detail;
};

struct RunOutcome {
  std::string experiment;
  std::string config_hash;  // 16 hex digits of FNV-1a over the canonical config dump
  nlohmann::json report;
  std::string csv;
  std::vector<CheckResult> checks;
  bool passed() const;
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> parallelism;
};

// Parses and validates all experiment fields; throws ConfigError.
ExperimentConfig parse_experiment_config(const std::string& text);
void validate_experiment_config(const ExperimentConfig& cfg);

std::string config_hash(const ExperimentConfig& cfg);

RunOutcome run_experiment(ExperimentConfig cfg, const RunOverrides& overrides = {});

// Writes {experiment}-{hash}.json and .csv into dir; returns the JSON path.
std::string write_outputs(const RunOutcome& out, const std::string& dir);

std::string list_experiments();

const char* library_version();

}  // namespace rfm
