#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "flatmin/config.hpp"

namespace flatmin {

inline constexpr const char* kArtifactVersion = "1.0.0";

struct OutputFile {
  std::string name;
  std::string contents;
};

/// Everything a run produces, held in memory until it is written.
struct RunOutput {
  nlohmann::json report;
  std::vector<OutputFile> files;  // excludes report.json
};

/// Non-fatal notes about a resolved config, e.g. an active alpha^n pre-switch
/// rate or an untested MIAdam order.
std::vector<std::string> config_warnings(const ExperimentConfig& cfg);

/// Runs the experiment described by `cfg` without touching the filesystem
/// (except reading idx datasets). The report's "results" section depends only
/// on the config; "wall_clock_seconds" is the only non-deterministic field.
RunOutput execute(const ExperimentConfig& cfg);

/// Writes report.json and the CSVs into `dir`. If any write fails, files
/// already written by this call are removed before rethrowing.
void write_outputs(const RunOutput& out, const std::filesystem::path& dir);

/// Reads a config file. A previous report.json is accepted too; its embedded
/// "config" is used.
ExperimentConfig load_config_file(const std::filesystem::path& path);

}  // namespace flatmin
