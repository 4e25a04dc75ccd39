#pragma once

// JSON run configuration. Every key has a default; unknown keys are rejected.

#include <filesystem>
#include <string>

#include "hqfno/model.hpp"
#include "hqfno/synthdata.hpp"
#include "hqfno/train.hpp"
#include "json.hpp"

namespace hqfno::config {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct RunConfig {
  model::ModelConfig model;
  train::TrainConfig train;
  synthdata::MaterialConstants material;
  synthdata::GenerateOptions data;
  std::string dataset_dir = "data";
  std::string output_dir = "runs";
  std::string noise_profile;  // empty: built-in heron-like profile
};

json to_json(const model::ModelConfig& c);
model::ModelConfig model_config_from_json(const json& j);
json to_json(const train::TrainConfig& c);
train::TrainConfig train_config_from_json(const json& j);
json to_json(const synthdata::MaterialConstants& m);
synthdata::MaterialConstants material_from_json(const json& j);
json to_json(const synthdata::GenerateOptions& o);
synthdata::GenerateOptions generate_options_from_json(const json& j);
json to_json(const RunConfig& c);

/// Overlays `user` onto the defaults; throws ConfigError on unknown keys,
/// wrong types or a schema_version other than kSchemaVersion.
RunConfig parse_run_config(const json& user);
RunConfig load_run_config(const std::filesystem::path& path);

/// Recursive overlay of `user` onto `defaults`; every user key must exist in
/// the defaults. `where` prefixes error messages.
json overlay_strict(const json& defaults, const json& user, const std::string& where = "");

/// FNV-1a of a file's bytes as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);
std::string text_hash(const std::string& text);

}  // namespace hqfno::config
