#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfnet/io.hpp"
#include "mfnet/model.hpp"

namespace mfnet {

inline constexpr const char* kVersion = "0.1.0";

/// Names accepted in the "experiment" field.
std::vector<std::string> experiment_names();

struct ExperimentConfig {
  std::string experiment;
  ModelSpec spec;
  std::string model_source;  // catalog name, file path or "inline"
  std::vector<std::size_t> ns;
  std::vector<double> betas;
  std::size_t replicas = 0;
  std::uint64_t seed = 1;
  std::size_t grid = 20;
  std::string out = "out";
  double event_budget = 5e8;
  std::size_t threads = 1;
  Json raw;  // the document after defaults and overrides, hashed into the manifest
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> budget;
  std::optional<std::size_t> threads;
};

/// Fill defaults for `experiment`, apply overrides and resolve the model. A model may be
/// a catalog name, a path to a model JSON (relative to `base_dir`) or an inline object.
/// Throws ValidationError on anything malformed, including an invalid model.
ExperimentConfig parse_config(Json doc, const std::string& experiment, const ConfigOverrides& overrides = {},
                              const std::string& base_dir = ".");

/// Run the configured experiment, write its data files and manifest.json into cfg.out and
/// return the report. Everything except the manifest timestamp is a function of the config.
Json run_experiment(const ExperimentConfig& cfg);

/// 64-bit FNV-1a of the compact dump.
std::uint64_t config_hash(const Json& doc);

}  // namespace mfnet
