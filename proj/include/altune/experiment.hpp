#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "altune/config.hpp"
#include "altune/design_space.hpp"

namespace altune {

/// One evaluation of a (fold, model, strategy) run. A NaN metric_value marks
/// an N/A cell: the strategy needs a capability the model lacks.
struct ExperimentRecord {
  std::size_t fold = 0;
  std::string model;
  std::string strategy;
  std::size_t n_train = 0;
  std::string metric_name;
  double metric_value = 0.0;
  std::uint64_t seed = 0;

  bool available() const;
  /// Field-wise equality; two N/A values compare equal.
  bool operator==(const ExperimentRecord& other) const;
};

struct SummaryRow {
  std::string strategy;
  std::string model;
  std::size_t window_center = 0;
  std::size_t window_halfwidth = 5;
  double mean_metric = 0.0;  // NaN when the window holds no available record
};

/// Mean metric of a strategy against the random strategy at one n_train.
/// improvement > 0 means the strategy did better than random.
struct ImprovementRow {
  std::string model;
  std::string strategy;
  std::size_t n_train = 0;
  double mean_metric = 0.0;
  double random_metric = 0.0;
  double improvement = 0.0;
};

/// The sample pool an experiment draws from. Only the member matching the
/// task is populated.
struct ExperimentData {
  std::vector<RegressionSample> regression;
  std::vector<PreferenceSample> preference;

  std::size_t size(Task task) const;
};

/// Reads config.data when set, otherwise generates the oracle pool from
/// master_seed. Throws ConfigError when the budget does not fit the data.
ExperimentData load_data(const ExperimentConfig& config);

/// Index sets of one fold: held-out test split, initial training set and
/// the candidate pool. Pairwise disjoint and jointly covering all samples.
struct FoldSplit {
  std::vector<std::size_t> test;
  std::vector<std::size_t> seed;
  std::vector<std::size_t> pool;
};

/// Random split for `fold`, shared by every model and strategy of the fold.
/// The test split holds round(test_fraction * n) samples.
FoldSplit split_fold(const ExperimentConfig& config, std::size_t fold, std::size_t n);

/// Seed of the rng stream owned by one (fold, model, strategy) run.
std::uint64_t run_seed(std::uint64_t master_seed, std::size_t fold, const std::string& model,
                       const std::string& strategy);

struct FoldResult {
  std::vector<ExperimentRecord> records;
  /// Regression only: mean squared error of the predicted objective loss.
  std::vector<ExperimentRecord> objective_records;
};

/// Runs the acquisition loop of one fold from seed_size to budget samples.
FoldResult run_fold(const ExperimentConfig& config, std::size_t fold, const std::string& model,
                    const std::string& strategy, const ExperimentData& data);

struct ExperimentResult {
  std::vector<ExperimentRecord> records;
  std::vector<ExperimentRecord> objective_records;
  std::vector<SummaryRow> summaries;
  std::vector<ImprovementRow> improvements;
};

/// Every fold x model x strategy run, spread over `workers` threads. Results
/// do not depend on the number of workers.
ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentData& data,
                                unsigned workers = 1);
ExperimentResult run_experiment(const ExperimentConfig& config, unsigned workers = 1);

/// Mean of the available records with n_train within halfwidth of each
/// center, per (strategy, model) in order of first appearance.
std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records,
                                  const std::vector<std::size_t>& centers, std::size_t halfwidth);

/// Per (model, strategy, n_train) fold means against random. For mse the
/// improvement is random - strategy, for f1 strategy - random. Empty when
/// no random strategy was run.
std::vector<ImprovementRow> improvement_over_random(const std::vector<ExperimentRecord>& records);

void write_records(std::ostream& out, const std::vector<ExperimentRecord>& records);
std::vector<ExperimentRecord> read_records(std::istream& in);
std::vector<ExperimentRecord> load_records(const std::filesystem::path& path);
void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_improvements(std::ostream& out, const std::vector<ImprovementRow>& rows);

/// Writes records.csv, summary.csv, improvement.csv, config_echo.ini and,
/// for regression, objective_records.csv into `out_dir`.
void emit_outputs(const ExperimentResult& result, const ExperimentConfig& config,
                  const std::filesystem::path& out_dir);

}  // namespace altune
