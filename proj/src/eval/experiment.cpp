#include <algorithm>

#include "camseer/error.hpp"
#include "camseer/eval.hpp"

namespace camseer::eval {

RunResult evaluate(const ensemble::EnsembleModel& model, const dataset::SegmentStore& store,
                   std::span<const dataset::LabeledSegment> segments, std::size_t threads) {
  require(!segments.empty(), ErrorKind::InvalidParameter, "nothing to evaluate");
  const auto probs = ensemble::member_probabilities(model, store, segments, threads);
  const auto votes = ensemble::votes_from_probabilities(probs, model.size(), model.vote_rule);
  std::vector<int> pred(votes.size()), truth(votes.size());
  for (std::size_t i = 0; i < votes.size(); ++i) {
    pred[i] = votes[i].final_class;
    truth[i] = segments[i].label;
  }
  RunResult r;
  r.cm = confusion(pred, truth);
  r.m = metrics(r.cm);
  r.stability = ensemble::stability_curve(probs, segments);
  return r;
}

namespace {

std::vector<std::vector<dataset::LabeledSegment>> training_sets(const dataset::DatasetSplits& splits,
                                                                const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.balanced)
    return ensemble::make_balanced_subsets(splits.train_pool_pos, splits.train_pool_neg, cfg.k, seed);
  require(cfg.k == 1, ErrorKind::InvalidParameter, "unbalanced training uses a single network (k = 1)");
  std::vector<dataset::LabeledSegment> all = splits.train_pool_pos;
  all.insert(all.end(), splits.train_pool_neg.begin(), splits.train_pool_neg.end());
  dataset::sort_segments(all);
  return {std::move(all)};
}

}  // namespace

ExperimentReport run_experiment(const dataset::PreparedDataset& data, const ExperimentConfig& cfg) {
  require(cfg.k >= 1 && cfg.num_seeds >= 1 && !cfg.horizons.empty(), ErrorKind::InvalidParameter,
          "experiment needs k >= 1, at least one seed and one horizon");
  auto horizons = cfg.horizons;
  std::sort(horizons.begin(), horizons.end());
  horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());

  const auto& dcfg = data.manifest.config;
  nn::NetworkConfig net = cfg.network;
  net.segment_length = dcfg.segment_length;
  const std::string dataset_digest = io::sha256_hex(io::dump(data.manifest.to_json()));

  ExperimentReport out;
  out.provenance["dataset_sha256"] = dataset_digest;
  out.provenance["recordings"] = io::json::array();
  for (const auto& r : data.manifest.recordings)
    out.provenance["recordings"].push_back({{"id", r.id}, {"sha256", r.digest}});
  out.provenance["experiment"] = cfg.to_json();
  out.provenance["segment_length"] = dcfg.segment_length;
  out.provenance["guard_samples"] = dcfg.guard;
  out.provenance["dt"] = data.manifest.dt;

  for (std::size_t h : horizons) {
    const auto ds = h == dcfg.horizon ? data : dataset::with_horizon(data, h);
    MetricsReport rep;
    rep.horizon_samples = h;
    rep.horizon_s = static_cast<double>(h) * data.manifest.dt;
    rep.segment_length = dcfg.segment_length;
    for (std::size_t r = 0; r < cfg.num_seeds; ++r) {
      const std::uint64_t seed = cfg.run_seed(r);
      try {
        const auto subsets = training_sets(ds.splits, cfg, seed);
        auto model = cfg.balanced ? ensemble::train_ensemble(net, *ds.store, subsets, ds.splits.validation,
                                                             seed * 1000, cfg.threads)
                                  : ensemble::train_single(net, *ds.store, subsets.front(), ds.splits.validation,
                                                           seed * 1000);
        model.vote_rule = cfg.vote_rule;
        model.norm_stats = data.manifest.norm_stats;
        model.horizon_samples = h;
        auto run = evaluate(model, *ds.store, ds.splits.test, cfg.threads);
        run.seed = seed;
        if (cfg.artifact_dir) {
          const std::string rel = "h" + std::to_string(h) + "/seed" + std::to_string(seed);
          ensemble::save_ensemble(*cfg.artifact_dir / rel, model, dataset_digest);
          run.ensemble_manifest = rel + "/ensemble.json";
        }
        rep.runs.push_back(std::move(run));
      } catch (const Error& e) {
        fail(e.kind(), "horizon " + std::to_string(h) + ", seed " + std::to_string(seed) + ": " + e.what());
      }
    }
    rep.aggregate();
    out.per_horizon.emplace(h, std::move(rep));
  }
  if (out.per_horizon.size() > 1 && out.per_horizon.contains(0))
    out.relative = relative_performance(out.per_horizon, data.manifest.dt);
  return out;
}

}  // namespace camseer::eval
