#pragma once

#include <filesystem>
#include <string>

#include "balmse/eval.hpp"

namespace balmse {

enum class ModelKind { Autoencoder, Vae };

ModelKind parse_model_kind(const std::string& name);
std::string to_string(ModelKind kind);

/// Everything a CLI invocation needs. `train` uses the first entries of the
/// epochs and losses lists.
struct RunConfig {
  ExperimentConfig experiment;
  ModelKind model = ModelKind::Autoencoder;
  std::filesystem::path out = "out";
};

/// Sectioned `key = value` text ([data], [model], [experiment], [run]) or a
/// JSON object of the same shape; the format is picked from the first
/// non-blank character. Unknown sections or keys are a ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Sectioned text listing every key with its current value; parse_config
/// reads it back to an equal configuration.
std::string dump_config(const RunConfig& config);

}  // namespace balmse
