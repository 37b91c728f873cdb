#include "camseer/ensemble.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include "camseer/error.hpp"
#include "camseer/parallel.hpp"

namespace camseer::ensemble {

using dataset::LabeledSegment;

std::string to_string(VoteRule rule) { return rule == VoteRule::Majority ? "majority" : "mean-probability"; }

VoteRule vote_rule_from_string(const std::string& name) {
  if (name == "majority") return VoteRule::Majority;
  if (name == "mean-probability") return VoteRule::MeanProbability;
  fail(ErrorKind::InvalidParameter, "unknown vote rule '" + name + "' (expected majority or mean-probability)");
}

void EnsembleModel::validate() const {
  require(!networks.empty(), ErrorKind::InvalidParameter, "an ensemble needs at least one network");
  require(seeds.size() == networks.size(), ErrorKind::ContractViolation, "one seed per ensemble member expected");
  for (const auto& n : networks) {
    require(n.config.input_width == dataset::kFeatureWidth, ErrorKind::ContractViolation,
            "ensemble member has the wrong input width");
    require(n.config.segment_length == segment_length, ErrorKind::ContractViolation,
            "ensemble members disagree on the segment length");
  }
}

std::size_t majority_threshold(std::size_t k) { return (k + 1) / 2; }

VoteRecord combine(std::span<const double> probabilities, VoteRule rule) {
  require(!probabilities.empty(), ErrorKind::ContractViolation, "no member probabilities to combine");
  VoteRecord v;
  v.probabilities.assign(probabilities.begin(), probabilities.end());
  v.classes.reserve(probabilities.size());
  double sum = 0.0;
  for (double p : probabilities) {
    const int c = nn::classify(p);
    v.classes.push_back(c);
    v.positive_votes += static_cast<std::size_t>(c);
    sum += p;
  }
  if (rule == VoteRule::Majority)
    v.final_class = v.positive_votes >= majority_threshold(probabilities.size()) ? 1 : 0;
  else
    v.final_class = nn::classify(sum / static_cast<double>(probabilities.size()));
  return v;
}

std::vector<std::vector<LabeledSegment>> make_balanced_subsets(std::span<const LabeledSegment> pool_pos,
                                                                std::span<const LabeledSegment> pool_neg,
                                                                std::size_t k, std::uint64_t seed) {
  require(k >= 1, ErrorKind::InvalidParameter, "ensemble size must be at least 1");
  if (pool_neg.size() < pool_pos.size())
    fail(ErrorKind::Infeasible, "cannot balance: " + std::to_string(pool_pos.size()) + " positives but only " +
                                    std::to_string(pool_neg.size()) + " negatives");
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates from any arrangement yields a uniform subset, so the
  // index vector is not reset between draws.
  std::vector<std::size_t> idx(pool_neg.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;

  std::vector<std::vector<LabeledSegment>> subsets(k);
  for (auto& subset : subsets) {
    const std::size_t n = pool_pos.size();
    for (std::size_t i = 0; i < n; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    subset.assign(pool_pos.begin(), pool_pos.end());
    for (std::size_t i = 0; i < n; ++i) subset.push_back(pool_neg[idx[i]]);
    dataset::sort_segments(subset);
  }
  return subsets;
}

EnsembleModel train_ensemble(const nn::NetworkConfig& config, const dataset::SegmentStore& store,
                             std::span<const std::vector<LabeledSegment>> subsets,
                             std::span<const LabeledSegment> val_set, std::uint64_t base_seed, std::size_t threads) {
  require(!subsets.empty(), ErrorKind::InvalidParameter, "no training subsets given");
  for (const auto& s : subsets) {
    const auto pos = std::count_if(s.begin(), s.end(), [](const LabeledSegment& x) { return x.label == 1; });
    require(2 * static_cast<std::size_t>(pos) == s.size(), ErrorKind::ContractViolation,
            "training subset is not balanced");
  }

  const std::size_t k = subsets.size();
  std::vector<nn::TrainResult> results(k);
  parallel_for(k, threads, [&](std::size_t i) {
    nn::NetworkConfig cfg = config;
    cfg.seed = base_seed + i;
    try {
      results[i] = nn::train_network(cfg, store, subsets[i], val_set);
    } catch (const Error& e) {
      fail(e.kind(), "ensemble member " + std::to_string(i) + ": " + e.what());
    }
  });

  EnsembleModel model;
  model.segment_length = config.segment_length;
  for (std::size_t i = 0; i < k; ++i) {
    model.networks.push_back(std::move(results[i].params));
    model.logs.push_back(std::move(results[i].log));
    model.seeds.push_back(base_seed + i);
  }
  if (!subsets.front().empty()) model.horizon_samples = subsets.front().front().horizon;
  return model;
}

EnsembleModel train_single(const nn::NetworkConfig& config, const dataset::SegmentStore& store,
                           std::span<const LabeledSegment> train_set, std::span<const LabeledSegment> val_set,
                           std::uint64_t seed) {
  nn::NetworkConfig cfg = config;
  cfg.seed = seed;
  auto r = nn::train_network(cfg, store, train_set, val_set);
  EnsembleModel model;
  model.segment_length = config.segment_length;
  model.networks.push_back(std::move(r.params));
  model.logs.push_back(std::move(r.log));
  model.seeds.push_back(seed);
  if (!train_set.empty()) model.horizon_samples = train_set.front().horizon;
  return model;
}

VoteRecord ensemble_predict(const EnsembleModel& model, std::span<const double> segment) {
  require(!model.networks.empty(), ErrorKind::ContractViolation, "empty ensemble");
  const std::size_t width = model.networks.front().config.input_width;
  require(segment.size() == model.segment_length * width, ErrorKind::ContractViolation,
          "segment must be " + std::to_string(model.segment_length) + " x " + std::to_string(width) + " values");
  std::vector<double> probs;
  probs.reserve(model.size());
  for (const auto& net : model.networks) probs.push_back(nn::predict(net, segment).probability);
  return combine(probs, model.vote_rule);
}

std::vector<std::vector<double>> member_probabilities(const EnsembleModel& model, const dataset::SegmentStore& store,
                                                      std::span<const LabeledSegment> segments, std::size_t threads) {
  for (const auto& s : segments)
    require(s.length == model.segment_length, ErrorKind::ContractViolation,
            "segment length does not match the ensemble");
  std::vector<std::vector<double>> out(model.size());
  parallel_for(model.size(), threads,
               [&](std::size_t i) { out[i] = nn::predict_probabilities(model.networks[i], store, segments); });
  return out;
}

std::vector<VoteRecord> votes_from_probabilities(const std::vector<std::vector<double>>& member_probs, std::size_t k,
                                                 VoteRule rule) {
  require(k >= 1 && k <= member_probs.size(), ErrorKind::ContractViolation, "invalid ensemble prefix size");
  const std::size_t n = member_probs.front().size();
  std::vector<VoteRecord> out;
  out.reserve(n);
  std::vector<double> column(k);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < k; ++i) column[i] = member_probs[i][j];
    out.push_back(combine(column, rule));
  }
  return out;
}

std::vector<VoteRecord> ensemble_predict(const EnsembleModel& model, const dataset::SegmentStore& store,
                                         std::span<const LabeledSegment> segments, std::size_t threads) {
  if (segments.empty()) return {};
  return votes_from_probabilities(member_probabilities(model, store, segments, threads), model.size(),
                                  model.vote_rule);
}

std::vector<double> stability_curve(const std::vector<std::vector<double>>& member_probs,
                                    std::span<const LabeledSegment> eval_set) {
  require(!member_probs.empty() && !eval_set.empty(), ErrorKind::ContractViolation,
          "stability curve needs members and a labeled set");
  std::vector<double> curve;
  for (std::size_t k = 1; k <= member_probs.size(); ++k) {
    const auto votes = votes_from_probabilities(member_probs, k, VoteRule::Majority);
    std::size_t correct = 0;
    for (std::size_t j = 0; j < votes.size(); ++j) correct += votes[j].final_class == eval_set[j].label;
    curve.push_back(static_cast<double>(correct) / static_cast<double>(eval_set.size()));
  }
  return curve;
}

std::vector<double> stability_curve(const EnsembleModel& model, const dataset::SegmentStore& store,
                                    std::span<const LabeledSegment> eval_set, std::size_t threads) {
  return stability_curve(member_probabilities(model, store, eval_set, threads), eval_set);
}

std::string norm_reference(const dataset::ChannelStats& stats) {
  return io::sha256_hex(dataset::stats_to_json(stats).dump());
}

io::json save_ensemble(const std::filesystem::path& dir, const EnsembleModel& model,
                       const std::string& dataset_digest) {
  model.validate();
  std::filesystem::create_directories(dir);
  const std::string ref = norm_reference(model.norm_stats);
  io::json members = io::json::array();
  for (std::size_t i = 0; i < model.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "member_%02zu.cnet", i);
    const auto bytes = nn::save_model(model.networks[i], ref);
    io::write_atomic(dir / name, std::span<const std::uint8_t>(bytes));
    io::json m = {{"file", name}, {"sha256", io::sha256_hex(bytes)}, {"seed", model.seeds[i]}};
    if (i < model.logs.size()) m["training"] = model.logs[i].to_json();
    members.push_back(std::move(m));
  }
  io::json j;
  j["format"] = "camseer-ensemble";
  j["version"] = 1;
  j["k"] = model.size();
  j["vote_rule"] = to_string(model.vote_rule);
  j["segment_length"] = model.segment_length;
  j["horizon_samples"] = model.horizon_samples;
  j["dataset_sha256"] = dataset_digest;
  j["network"] = model.networks.front().config.to_json();
  j["norm_stats"] = dataset::stats_to_json(model.norm_stats);
  j["norm_reference"] = ref;
  j["members"] = std::move(members);
  io::write_json(dir / "ensemble.json", j);
  return j;
}

EnsembleModel load_ensemble(const std::filesystem::path& manifest_path) {
  const auto j = io::read_json(manifest_path);
  const auto dir = manifest_path.parent_path();
  EnsembleModel model;
  try {
    require(j.at("format").get<std::string>() == "camseer-ensemble", ErrorKind::Format,
            manifest_path.string() + ": not an ensemble manifest");
    model.vote_rule = vote_rule_from_string(j.at("vote_rule").get<std::string>());
    model.segment_length = j.at("segment_length").get<std::size_t>();
    model.horizon_samples = j.at("horizon_samples").get<std::size_t>();
    model.norm_stats = dataset::stats_from_json(j.at("norm_stats"));
    const std::string ref = norm_reference(model.norm_stats);
    for (const auto& m : j.at("members")) {
      const auto path = dir / m.at("file").get<std::string>();
      const auto bytes = io::read_bytes(path);
      if (io::sha256_hex(bytes) != m.at("sha256").get<std::string>())
        fail(ErrorKind::Format, path.string() + ": digest does not match the ensemble manifest");
      auto loaded = nn::load_model(bytes);
      if (loaded.norm_reference != ref)
        fail(ErrorKind::Format, path.string() + ": normalization statistics differ from the ensemble manifest");
      model.networks.push_back(std::move(loaded.params));
      model.seeds.push_back(m.at("seed").get<std::uint64_t>());
    }
    require(model.size() == j.at("k").get<std::size_t>(), ErrorKind::Format, "member count does not match k");
  } catch (const io::json::exception& e) {
    fail(ErrorKind::Format, manifest_path.string() + ": malformed ensemble manifest: " + e.what());
  }
  model.validate();
  return model;
}

}  // namespace camseer::ensemble
