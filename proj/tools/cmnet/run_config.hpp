#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cmnet/data/tagging.hpp"
#include "cmnet/model/config.hpp"
#include "cmnet/train/trainer.hpp"

namespace cmnet::cli {

// Everything a run needs, read from one JSON document. Relative paths are
// resolved against the directory holding the document.
struct RunConfig {
  std::filesystem::path train;
  std::filesystem::path valid;  // optional
  std::filesystem::path test;   // optional
  std::filesystem::path embeddings;
  std::filesystem::path checkpoint_dir;
  data::TagScheme scheme = data::TagScheme::kBioes;
  model::ModelConfig model;
  train::TrainConfig training;
};

// Throws ConfigError naming the offending key.
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// Checks that every input path exists and the model and training settings
// are consistent. Throws ConfigError naming the field.
void validate(const RunConfig& config, bool needs_checkpoint_dir);

// Applies CMNET_SEED when set.
void apply_environment(RunConfig& config);

}  // namespace cmnet::cli
