#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "altune/acquisition_classification.hpp"
#include "altune/acquisition_regression.hpp"
#include "altune/classifiers.hpp"
#include "altune/design_space.hpp"
#include "altune/gp_regression.hpp"
#include "altune/synthetic_players.hpp"

namespace altune {

enum class Task { regression, classification };

const char* to_string(Task task);

/// Every knob of an experiment run. Fields left empty (models, strategies,
/// pool size, window centres) take task-dependent defaults in `resolve()`.
struct ExperimentConfig {
  // [experiment]
  Task task = Task::regression;
  std::size_t folds = 10;
  std::size_t seed_size = 30;
  std::size_t budget = 300;
  double test_fraction = 0.10;
  std::vector<std::string> models;
  std::size_t eval_every = 1;
  std::uint64_t master_seed = 1;
  std::size_t pool_size = 0;  // synthetic pool size; 0 selects 991 / 416
  std::string data;           // optional dataset CSV replacing the oracle pool
  double target_hits = 6.0;
  std::vector<std::size_t> window_centers;
  std::size_t window_halfwidth = 5;
  ParameterSpace enemy_space = default_enemy_space();
  ParameterSpace control_space = default_control_space();

  // [oracle]
  HitOracleParams hit_oracle;
  PreferenceOracleParams preference_oracle;

  // [gp]
  double gp_signal_variance = 1.0;
  double gp_length_scale = 0.3;
  double gp_noise_variance = 0.1;
  bool gp_optimize = true;
  int gp_restarts = 2;
  std::size_t gp_refit_every = 10;
  GpClassifierOptions gp_classifier;

  // [ksvm], [mlp]
  SvmOptions ksvm;
  MlpOptions mlp;

  // [strategy]
  std::vector<std::string> strategies;
  RegressionStrategy regression_strategy;
  ClassificationStrategy classification_strategy;

  /// Fills task-dependent defaults; idempotent.
  void resolve();
  /// Throws ConfigError listing every invalid key.
  void validate() const;

  RegressionObjective objective() const { return {target_hits}; }
  /// Initial kernel for `dimension` inputs, built from the [gp] entries.
  KernelParams kernel(Eigen::Index dimension) const;
  ClassifierConfig classifier_config(ClassifierKind kind) const;
  std::size_t effective_pool_size() const;
};

/// Parses the sectioned `key = value` format. Unknown sections or keys are
/// errors. The result is resolved and validated.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Serializes every key, so parsing the text reproduces the configuration.
std::string to_config_text(const ExperimentConfig& config);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace altune
