#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "amcontrast/cloud.hpp"
#include "amcontrast/model.hpp"

namespace amc {

/// Run configuration read from a flat key = value file.
///
///   # comment
///   [train]
///   lr = 0.01
///   epochs = 100
///
/// Keys may also be written fully qualified (`train.lr = 0.01`) outside any
/// section. Unknown sections or keys raise ConfigError naming the key.
struct RunConfig {
  std::optional<std::filesystem::path> cloud_file;  // scene.file
  SceneSpec scene;
  NetConfig net;
  TrainConfig train;
  std::string margin_name = "s3dis";  // preset last applied, or "custom"
  std::filesystem::path output_dir = "run";
};

RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Sets one qualified key ("section.key"); throws ConfigError.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// Canonical text of every key, in the same syntax parse_run_config accepts.
std::string dump_run_config(const RunConfig& cfg);

}  // namespace amc
