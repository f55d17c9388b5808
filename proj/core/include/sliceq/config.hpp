#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "sliceq/scenario.hpp"

namespace sliceq {

/// Optional link from a run to a slice model: the gateway gets one queue per
/// constraint class of the named domain.
struct SliceModelRef {
  std::string path;
  std::string domain;
};

/// A fully resolved run configuration.
struct RunConfig {
  ScenarioSpec scenario;
  std::optional<std::string> output_dir;
  std::optional<SliceModelRef> slice_model;
};

/// Command-line overrides; set fields win over the file.
struct ConfigOverrides {
  std::optional<int> scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<double> phase_duration;
  std::optional<double> epsilon;
  std::optional<double> alpha;
  std::optional<double> gamma;
};

/// Parses a JSON configuration document. Missing keys take the shipped
/// defaults; unknown keys, wrong types and violated invariants are all
/// collected and thrown together as a ConfigError. Relative slice model paths
/// are resolved against base_dir.
RunConfig parse_run_config(const nlohmann::json& doc, const ConfigOverrides& overrides = {},
                           const std::string& base_dir = ".");

/// Reads and parses a configuration file; an empty path means all defaults.
RunConfig load_run_config(const std::string& path, const ConfigOverrides& overrides = {});

/// The configuration as it is echoed into run outputs. Output locations are
/// left out so the echo depends only on what determines the run.
nlohmann::json to_json(const RunConfig& config);

/// The shipped default configuration document.
nlohmann::json default_config_json();

}  // namespace sliceq
