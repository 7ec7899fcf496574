#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "flatmin/dataset.hpp"
#include "flatmin/landscape.hpp"
#include "flatmin/mlp.hpp"
#include "flatmin/optim.hpp"
#include "flatmin/presets.hpp"
#include "flatmin/schedule.hpp"
#include "flatmin/theory.hpp"

namespace flatmin {

enum class ExperimentKind { trajectory, grid_flatness, train, escape_theory, regret, hessian_report };

const char* to_string(ExperimentKind kind);

/// How MIAdam's pre-switch learning rate is chosen.
enum class PreSwitchLr {
  alpha_pow_n,   // alpha^n
  gain_matched,  // alpha * (1 - kappa)^(n - 1); equals alpha for n = 1
  fixed,         // explicit number
};

struct OptimizerBlock {
  OptimizerConfig config;
  PreSwitchLr pre_switch_mode = PreSwitchLr::alpha_pow_n;
  /// Train kinds only: switch given in epochs, converted to steps at run time.
  std::optional<std::int64_t> switch_epochs;
};

struct DatasetBlock {
  std::string kind = "blobs";  // "blobs" or "idx"
  BlobsParams blobs;
  std::string images_path;
  std::string labels_path;
  double noise_rate = 0.0;
};

struct ModelBlock {
  std::vector<std::size_t> hidden{32};
  Activation activation = Activation::tanh;
};

struct TrainingBlock {
  int epochs = 150;
  std::size_t batch_size = 128;
};

struct TrajectoryBlock {
  Vec2 start{-1.8, 0.5};
  std::int64_t total_steps = kSimulationSteps;
};

struct GridBlock {
  GridRegion region;
  std::size_t cols = 50;
  std::size_t rows = 50;
  std::int64_t total_steps = kSimulationSteps;
};

struct RegretBlock {
  std::size_t dim = 10;
  double amplitude = 0.2;
  RegretOptions options;
};

struct HessianBlock {
  int max_iters = 500;
  double tol = 1e-8;
  int probes = 200;
};

/// Fully resolved experiment description. Presets are expanded and defaults
/// filled, so `to_json` of a parsed config parses back to the same values.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::trajectory;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  LrSchedule schedule;
  std::vector<OptimizerBlock> optimizers;
  std::string landscape_name;  // preset name or "custom"
  LandscapeSpec landscape;
  TrajectoryBlock trajectory;
  GridBlock grid;
  DatasetBlock dataset;
  ModelBlock model;
  TrainingBlock training;
  EscapeScenario scenario;
  RegretBlock regret;
  HessianBlock hessian;
};

/// Strict parse: unknown keys, wrong types and out-of-range values raise
/// ConfigError naming the JSON path of the offending field.
ExperimentConfig parse_config(const nlohmann::json& j);

/// Parses JSON text first; syntax errors are reported with line and column.
ExperimentConfig parse_config_text(std::string_view text);

nlohmann::json to_json(const ExperimentConfig& cfg);

/// Resolves an optimizer block to the config used for a run, applying the
/// pre-switch rule and converting switch_epochs with `steps_per_epoch`.
OptimizerConfig resolve_optimizer(const OptimizerBlock& block, std::int64_t steps_per_epoch = 1);

}  // namespace flatmin
