#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "camseer/dataset.hpp"
#include "camseer/ensemble.hpp"
#include "camseer/neuralnet.hpp"

namespace camseer::eval {

struct ConfusionMatrix {
  std::size_t tn = 0, fp = 0, fn = 0, tp = 0;

  std::size_t total() const { return tn + fp + fn + tp; }
  std::size_t positives() const { return tp + fn; }
  std::size_t negatives() const { return tn + fp; }
  bool operator==(const ConfusionMatrix&) const = default;
  io::json to_json() const;
  static ConfusionMatrix from_json(const io::json& j);
};

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> truths);

// A ratio that may be undefined (zero denominator); never silently zero.
struct Ratio {
  std::optional<double> value;
  std::string reason;

  bool defined() const { return value.has_value(); }
  double value_or_nan() const;
  io::json to_json() const;
  static Ratio of(double num, double den, const char* reason_if_undefined);
};

struct Metrics {
  Ratio accuracy;
  Ratio tpr;
  Ratio tnr;
};

Metrics metrics(const ConfusionMatrix& cm);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single run
  std::size_t count = 0;  // runs where the metric was defined
};

Summary summarize(std::span<const double> values);

struct RunResult {
  std::uint64_t seed = 0;
  ConfusionMatrix cm;
  Metrics m;
  std::vector<double> stability;  // majority accuracy of the first k members
  std::string ensemble_manifest;  // path of saved artifacts, if any
};

struct MetricsReport {
  std::size_t horizon_samples = 0;
  double horizon_s = 0.0;
  std::size_t segment_length = 0;
  std::vector<RunResult> runs;
  Summary accuracy, tpr, tnr;

  void aggregate();
  io::json to_json() const;
};

struct RelativeRow {
  std::size_t horizon_samples = 0;
  double horizon_s = 0.0;
  Ratio accuracy_pct, tpr_pct, tnr_pct;
};

struct RelativeReport {
  std::vector<RelativeRow> rows;
  io::json to_json() const;
  std::string to_csv() const;
};

// 100 * mean metric(h) / mean metric(0) for every horizon in `reports`.
RelativeReport relative_performance(const std::map<std::size_t, MetricsReport>& reports, double dt);

struct ExperimentConfig {
  nn::NetworkConfig network;
  std::size_t k = 15;
  std::vector<std::size_t> horizons{0};  // samples
  std::size_t num_seeds = 1;
  std::uint64_t base_seed = 1;
  ensemble::VoteRule vote_rule = ensemble::VoteRule::Majority;
  // false: one network on the whole (unbalanced) train pool; needs k = 1.
  bool balanced = true;
  std::size_t threads = 0;
  std::optional<std::filesystem::path> artifact_dir;

  // Seed of run r: base_seed + r. Subsets use the run seed, member k
  // trains with run_seed * 1000 + k.
  std::uint64_t run_seed(std::size_t r) const { return base_seed + r; }
  io::json to_json() const;
};

struct ExperimentReport {
  std::map<std::size_t, MetricsReport> per_horizon;
  std::optional<RelativeReport> relative;
  io::json provenance;

  io::json to_json() const;
};

// Evaluates one trained ensemble on a split.
RunResult evaluate(const ensemble::EnsembleModel& model, const dataset::SegmentStore& store,
                   std::span<const dataset::LabeledSegment> segments, std::size_t threads = 0);

// For every horizon and seed: balanced subsets, ensemble training, test-split
// evaluation. Horizons other than the dataset's reuse its held-out split.
ExperimentReport run_experiment(const dataset::PreparedDataset& data, const ExperimentConfig& cfg);

struct DurationRow {
  std::size_t segment_length = 0;
  double seconds = 0.0;
  MetricsReport report;
};

// Re-segments and re-splits (same seed) at every N, then runs the experiment
// at the dataset's horizon.
std::vector<DurationRow> sweep_segment_duration(const dataset::PreparedDataset& data,
                                                std::span<const std::size_t> durations, const ExperimentConfig& cfg);
std::string duration_csv(std::span<const DurationRow> rows);

struct HyperGrid {
  std::vector<std::vector<std::size_t>> architectures;
  std::vector<double> dropout;
  std::vector<double> recurrent_dropout;
  std::vector<std::size_t> batchnorm;
  std::vector<double> learning_rate;
  std::vector<double> lr_decay;
  std::vector<std::size_t> batch_size;
  std::vector<double> l2;

  // Cartesian product applied on top of `base`; an empty dimension keeps the
  // base value.
  std::vector<nn::NetworkConfig> expand(const nn::NetworkConfig& base) const;
  // Throws InvalidParameter for values outside the admissible search space.
  void check_admissible() const;
  static HyperGrid from_json(const io::json& j);
};

struct SweepBudget {
  std::size_t max_configs = 0;  // 0 = no limit
  std::size_t seeds_per_config = 1;
  std::uint64_t base_seed = 1;
  bool enforce_admissible = true;
  std::size_t threads = 0;
};

struct SweepEntry {
  std::size_t grid_index = 0;
  nn::NetworkConfig config;
  Summary val_accuracy, val_tpr, val_tnr;
};

// Trains each candidate on one balanced draw of the train pool per seed and
// scores it on the validation split. Sorted by mean validation accuracy.
std::vector<SweepEntry> sweep_hyperparameters(const dataset::PreparedDataset& data, const HyperGrid& grid,
                                              const nn::NetworkConfig& base, const SweepBudget& budget);
io::json sweep_to_json(std::span<const SweepEntry> entries);

std::string stability_csv(std::span<const double> curve);
std::string stability_csv(const MetricsReport& report);

}  // namespace camseer::eval
