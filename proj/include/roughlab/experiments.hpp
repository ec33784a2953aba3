#pragma once

#include "roughlab/csv.hpp"
#include "roughlab/errors.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace roughlab {

/// Invalid experiment configuration (unknown name or key, bad type, value out
/// of range).
class ConfigError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

struct ExperimentConfig {
  std::string experiment;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::string output;       // file prefix; defaults to the experiment name
  std::size_t threads = 0;  // 0: one per core
  nlohmann::json source;    // the config as given
};

/// Validates the top-level shape and the experiment name. Parameter values
/// are checked when the experiment starts, before any computation.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(const std::string& text);

struct ExperimentInfo {
  std::string name;
  std::string description;
};

const std::vector<ExperimentInfo>& list_experiments();
bool is_experiment(const std::string& name);
/// Registered name closest to `name` in edit distance.
std::string nearest_experiment(const std::string& name);

struct ExperimentResult {
  CsvTable table{{}};
  bool holds = true;
  nlohmann::json summary = nlohmann::json::object();
};

/// Runs the experiment in memory. Throws ConfigError for bad parameters,
/// NumericalError when a solver fails.
ExperimentResult run_experiment(const ExperimentConfig& config);

enum ExitCode : int { kExitOk = 0, kExitPropertyFailure = 1, kExitConfigError = 2, kExitNumericalError = 3 };

/// Reads a JSON config file, runs it, and writes <output>.report.csv and
/// <output>.meta.json. Messages go to `err`. threads_override replaces the
/// config's thread count when set.
int run_config_file(const std::string& path, std::ostream& err, std::optional<std::size_t> threads_override = {});

/// Like run_config_file for an already parsed config.
int run_and_write(const ExperimentConfig& config, std::ostream& err);

/// Version in git-describe style, e.g. "v0.3.0-g0f8d9c1".
std::string version_string();

}  // namespace roughlab
