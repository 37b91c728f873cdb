#pragma once

// Balanced-subset ensembles: every member sees all training positives plus its
// own uniform draw of as many negatives, and members vote.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "camseer/dataset.hpp"
#include "camseer/neuralnet.hpp"

namespace camseer::ensemble {

enum class VoteRule { Majority, MeanProbability };

std::string to_string(VoteRule rule);
VoteRule vote_rule_from_string(const std::string& name);

struct EnsembleModel {
  std::vector<nn::NetworkParams> networks;
  VoteRule vote_rule = VoteRule::Majority;
  dataset::ChannelStats norm_stats{};
  std::size_t segment_length = 50;
  std::size_t horizon_samples = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<nn::TrainingLog> logs;  // empty for loaded models

  std::size_t size() const { return networks.size(); }
  void validate() const;
};

struct VoteRecord {
  std::vector<int> classes;
  std::vector<double> probabilities;
  int final_class = 0;
  std::size_t positive_votes = 0;
};

// Smallest positive count that yields class 1 under majority voting: a strict
// majority for odd K, half for even K (ties go to class 1).
std::size_t majority_threshold(std::size_t k);

// Applies `rule` to one vector of member probabilities.
VoteRecord combine(std::span<const double> probabilities, VoteRule rule);

std::vector<std::vector<dataset::LabeledSegment>> make_balanced_subsets(
    std::span<const dataset::LabeledSegment> pool_pos, std::span<const dataset::LabeledSegment> pool_neg,
    std::size_t k, std::uint64_t seed);

// Member k trains on subsets[k] with seed base_seed + k. Members run on up to
// `threads` workers (0 = io::worker_count()); results do not depend on it.
EnsembleModel train_ensemble(const nn::NetworkConfig& config, const dataset::SegmentStore& store,
                             std::span<const std::vector<dataset::LabeledSegment>> subsets,
                             std::span<const dataset::LabeledSegment> val_set, std::uint64_t base_seed,
                             std::size_t threads = 0);

// One network on an arbitrary (typically the full, unbalanced) training set,
// wrapped as a K = 1 ensemble. The baseline the balanced ensemble is judged against.
EnsembleModel train_single(const nn::NetworkConfig& config, const dataset::SegmentStore& store,
                           std::span<const dataset::LabeledSegment> train_set,
                           std::span<const dataset::LabeledSegment> val_set, std::uint64_t seed);

VoteRecord ensemble_predict(const EnsembleModel& model, std::span<const double> segment);

// Member probabilities, one row per member, one column per segment.
std::vector<std::vector<double>> member_probabilities(const EnsembleModel& model, const dataset::SegmentStore& store,
                                                      std::span<const dataset::LabeledSegment> segments,
                                                      std::size_t threads = 0);

std::vector<VoteRecord> ensemble_predict(const EnsembleModel& model, const dataset::SegmentStore& store,
                                         std::span<const dataset::LabeledSegment> segments, std::size_t threads = 0);

// Votes from precomputed member probabilities, restricted to the first k members.
std::vector<VoteRecord> votes_from_probabilities(const std::vector<std::vector<double>>& member_probs, std::size_t k,
                                                 VoteRule rule);

// Majority-vote accuracy of the first k members, for k = 1..K.
std::vector<double> stability_curve(const EnsembleModel& model, const dataset::SegmentStore& store,
                                    std::span<const dataset::LabeledSegment> eval_set, std::size_t threads = 0);
std::vector<double> stability_curve(const std::vector<std::vector<double>>& member_probs,
                                    std::span<const dataset::LabeledSegment> eval_set);

// Digest identifying the normalization statistics a model expects.
std::string norm_reference(const dataset::ChannelStats& stats);

// Writes member_XX.cnet files and ensemble.json into `dir`; returns the manifest.
io::json save_ensemble(const std::filesystem::path& dir, const EnsembleModel& model,
                       const std::string& dataset_digest = {});
// Loads members listed in an ensemble manifest, verifying their digests.
EnsembleModel load_ensemble(const std::filesystem::path& manifest_path);

}  // namespace camseer::ensemble
