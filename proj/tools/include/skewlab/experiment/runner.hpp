#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "skewlab/experiment/config.hpp"

namespace skewlab::experiment {

inline constexpr std::string_view kToolName = "skewlab";
inline constexpr std::string_view kToolVersion = SKEWLAB_VERSION;

struct OutputFile {
  std::string name;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunResult {
  int exit_code = 0;  // 0 success, 1 experiment failure
  std::string error;
  std::vector<OutputFile> outputs;
  std::filesystem::path manifest;
  /// The manifest's summary object as JSON text.
  std::string summary;
};

/// Hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view data);

/// Runs the configured experiment, writes its data files and manifest.json
/// into cfg.out. Library errors become exit code 1 with the message in the
/// manifest; IOFailure if the directory or a file cannot be written.
RunResult run_experiment(const ExperimentConfig& cfg);

}  // namespace skewlab::experiment
