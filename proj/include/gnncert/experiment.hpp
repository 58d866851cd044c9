#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gnncert/bounds.hpp"
#include "gnncert/train.hpp"
#include "gnncert/verify.hpp"

namespace gnncert {

/// Everything a train / bounds / compare run depends on.
struct ExperimentSpec {
  /// Preset name (ER-1 ...), a dataset JSON path, or a TU prefix when tu_dir is set.
  std::string dataset;
  std::optional<std::filesystem::path> tu_dir;
  std::optional<std::size_t> max_graphs;
  std::uint64_t data_seed = 0;
  bool append_ones = false;

  ModelKind model = ModelKind::Mpgnn;
  std::vector<std::size_t> depths{2};
  std::size_t hidden = 128;
  /// Unset: 200 for synthetic data, 50 for TU data.
  std::optional<int> epochs;
  double lr = 1e-2;
  std::size_t batch = 128;
  double gamma = 1.0;
  std::vector<std::uint64_t> seeds{0};
  std::size_t jobs = 1;
  std::filesystem::path out = "out";

  /// Throws ConfigError: empty seeds or dataset, depth < 2, nonpositive sizes.
  void validate() const;
  int resolved_epochs() const;
  TrainConfig train_config(std::size_t depth, std::uint64_t seed) const;
};

/// Seeds from a comma list ("0,1,2") or inclusive range ("0-2").
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

/// Loads the spec's dataset (TU directory, JSON file or preset), applying
/// max_graphs and append_ones.
Dataset load_experiment_dataset(const ExperimentSpec& spec);

/// Fixed split used by train, bounds and compare.
inline constexpr double kTrainFraction = 0.9;
inline constexpr std::uint64_t kSplitSeed = 0;
Dataset training_split(const Dataset& ds);

/// Writes a preset dataset to out_path. Same seed gives identical bytes.
Dataset cmd_gen_data(const std::string& preset_name, std::uint64_t seed,
                     const std::filesystem::path& out_path);
Dataset cmd_gen_data(const SyntheticSpec& spec, std::uint64_t seed,
                     const std::filesystem::path& out_path);

/// Checkpoint and history file stems under spec.out.
std::string run_stem(const ExperimentSpec& spec, const std::string& dataset_name, std::size_t depth,
                     std::uint64_t seed);

/// Trains one (depth, seed) run and writes <stem>.ckpt.json and <stem>.history.csv.
TrainResult cmd_train(const ExperimentSpec& spec, const Dataset& ds, std::size_t depth,
                      std::uint64_t seed);

/// Bound report of a checkpoint on the training split of ds.
BoundReport cmd_bounds(const Dataset& ds, const ModelWeights& w, double gamma, std::uint64_t seed);

struct VerifyOptions {
  /// Subset of {perturbation, structural, concentration, equivalences}; empty = all.
  std::vector<std::string> checks;
  std::size_t trials = 1000;
  std::size_t structural_trials = 500;
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
};
std::vector<CheckReport> cmd_verify(const VerifyOptions& opts);

struct SummaryRow {
  std::size_t l = 0;
  std::size_t runs = 0;
  double pacbayes_mean = 0.0, pacbayes_std = 0.0;
  double rademacher_mean = kNotApplicable, rademacher_std = kNotApplicable;
};

/// Mean and sample standard deviation (n − 1 denominator; NaN for one run)
/// of the log certificates per depth, in ascending depth order.
std::vector<SummaryRow> summarize(const std::vector<BoundReport>& reports);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string summary_table(const std::string& dataset, const std::vector<SummaryRow>& rows);

struct CompareResult {
  std::vector<BoundReport> reports;  // (depth, seed) order
  std::vector<SummaryRow> summary;
};

/// Trains every (depth, seed) pair, writes per-run rows atomically under
/// out/runs/, then merges them in order into out/compare.csv and
/// out/summary.csv. Reruns overwrite the same files.
CompareResult cmd_compare(const ExperimentSpec& spec);

}  // namespace gnncert
