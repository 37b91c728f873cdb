#include <algorithm>
#include <cmath>

#include "camseer/error.hpp"
#include "camseer/eval.hpp"
#include "camseer/parallel.hpp"

namespace camseer::eval {

std::vector<DurationRow> sweep_segment_duration(const dataset::PreparedDataset& data,
                                                std::span<const std::size_t> durations, const ExperimentConfig& cfg) {
  require(!durations.empty(), ErrorKind::EmptyGrid, "no segment durations given");
  ExperimentConfig c = cfg;
  c.horizons = {data.manifest.config.horizon};
  std::vector<DurationRow> rows;
  for (std::size_t n : durations) {
    const auto ds = n == data.manifest.config.segment_length ? data : dataset::with_segment_length(data, n);
    auto rep = run_experiment(ds, c);
    DurationRow row;
    row.segment_length = n;
    row.seconds = static_cast<double>(n) * data.manifest.dt;
    row.report = std::move(rep.per_horizon.begin()->second);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<nn::NetworkConfig> HyperGrid::expand(const nn::NetworkConfig& base) const {
  std::vector<nn::NetworkConfig> out{base};
  // Each dimension multiplies the current list by its values.
  auto dim = [&out](const auto& values, auto apply) {
    if (values.empty()) return;
    std::vector<nn::NetworkConfig> next;
    for (const auto& c : out)
      for (const auto& v : values) {
        auto n = c;
        apply(n, v);
        next.push_back(std::move(n));
      }
    out = std::move(next);
  };
  dim(architectures, [](nn::NetworkConfig& c, const std::vector<std::size_t>& a) {
    const double d = c.dropout.empty() ? 0.0 : c.dropout.front();
    const double rd = c.recurrent_dropout.empty() ? 0.0 : c.recurrent_dropout.front();
    c.hidden_sizes = a;
    c.dropout.assign(a.size(), d);
    c.recurrent_dropout.assign(a.size(), rd);
  });
  dim(dropout, [](nn::NetworkConfig& c, double v) { c.dropout.assign(c.hidden_sizes.size(), v); });
  dim(recurrent_dropout, [](nn::NetworkConfig& c, double v) { c.recurrent_dropout.assign(c.hidden_sizes.size(), v); });
  dim(batchnorm, [](nn::NetworkConfig& c, std::size_t v) { c.num_batchnorm = v; });
  dim(learning_rate, [](nn::NetworkConfig& c, double v) { c.learning_rate = v; });
  dim(lr_decay, [](nn::NetworkConfig& c, double v) { c.lr_decay = v; });
  dim(batch_size, [](nn::NetworkConfig& c, std::size_t v) { c.batch_size = v; });
  dim(l2, [](nn::NetworkConfig& c, double v) { c.l2_lambda = v; });
  return out;
}

namespace {

template <typename T>
void check_in(const std::vector<T>& values, std::initializer_list<T> allowed, const char* name) {
  for (const T& v : values) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const T& a) {
      if constexpr (std::is_floating_point_v<T>)
        return std::abs(a - v) <= 1e-12 * std::max(1.0, std::abs(a));
      else
        return a == v;
    });
    if (!ok) fail(ErrorKind::InvalidParameter, std::string(name) + " value outside the admissible search space");
  }
}

}  // namespace

void HyperGrid::check_admissible() const {
  for (const auto& a : architectures) {
    if (a.empty() || a.size() > 2) fail(ErrorKind::InvalidParameter, "architectures have one or two LSTM layers");
    check_in<std::size_t>(a, {100, 300, 500, 700, 900, 1100}, "neurons");
  }
  check_in<double>(dropout, {0.1, 0.2, 0.3}, "dropout");
  check_in<double>(recurrent_dropout, {0.0, 0.2}, "recurrent_dropout");
  check_in<std::size_t>(batchnorm, {0, 1, 2}, "batchnorm");
  check_in<double>(learning_rate, {1e-3, 1e-4}, "learning_rate");
  check_in<double>(lr_decay, {0.90, 0.99, 1.0}, "lr_decay");
  check_in<std::size_t>(batch_size, {32, 64, 128, 256}, "batch_size");
  check_in<double>(l2, {0.1, 0.01, 0.001, 0.0001}, "l2");
}

HyperGrid HyperGrid::from_json(const io::json& j) {
  HyperGrid g;
  try {
    auto get = [&j](const char* key, auto& dst) {
      if (j.contains(key)) j.at(key).get_to(dst);
    };
    get("architectures", g.architectures);
    get("dropout", g.dropout);
    get("recurrent_dropout", g.recurrent_dropout);
    get("batchnorm", g.batchnorm);
    get("learning_rate", g.learning_rate);
    get("lr_decay", g.lr_decay);
    get("batch_size", g.batch_size);
    get("l2", g.l2);
  } catch (const io::json::exception& e) {
    fail(ErrorKind::InvalidParameter, std::string("malformed hyperparameter grid: ") + e.what());
  }
  return g;
}

std::vector<SweepEntry> sweep_hyperparameters(const dataset::PreparedDataset& data, const HyperGrid& grid,
                                              const nn::NetworkConfig& base, const SweepBudget& budget) {
  if (budget.enforce_admissible) grid.check_admissible();
  auto configs = grid.expand(base);
  const bool grid_empty = grid.architectures.empty() && grid.dropout.empty() && grid.recurrent_dropout.empty() &&
                          grid.batchnorm.empty() && grid.learning_rate.empty() && grid.lr_decay.empty() &&
                          grid.batch_size.empty() && grid.l2.empty();
  if (grid_empty) fail(ErrorKind::EmptyGrid, "hyperparameter grid is empty");
  if (budget.max_configs > 0 && configs.size() > budget.max_configs) configs.resize(budget.max_configs);
  require(budget.seeds_per_config >= 1, ErrorKind::InvalidParameter, "seeds_per_config must be at least 1");
  for (auto& c : configs) {
    c.segment_length = data.manifest.config.segment_length;
    c.validate();
  }

  const auto& splits = data.splits;
  const std::size_t seeds = budget.seeds_per_config;
  std::vector<Metrics> results(configs.size() * seeds);
  parallel_for(results.size(), budget.threads, [&](std::size_t job) {
    const std::size_t ci = job / seeds;
    const std::uint64_t seed = budget.base_seed + job % seeds;
    auto cfg = configs[ci];
    cfg.seed = seed * 1000;
    const auto subset = ensemble::make_balanced_subsets(splits.train_pool_pos, splits.train_pool_neg, 1, seed);
    try {
      const auto trained = nn::train_network(cfg, *data.store, subset.front(), splits.validation);
      const auto probs = nn::predict_probabilities(trained.params, *data.store, splits.validation);
      std::vector<int> pred(probs.size()), truth(probs.size());
      for (std::size_t i = 0; i < probs.size(); ++i) {
        pred[i] = nn::classify(probs[i]);
        truth[i] = splits.validation[i].label;
      }
      results[job] = metrics(confusion(pred, truth));
    } catch (const Error& e) {
      fail(e.kind(), "grid point " + std::to_string(ci) + ", seed " + std::to_string(seed) + ": " + e.what());
    }
  });

  std::vector<SweepEntry> entries;
  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    std::vector<double> a, p, n;
    for (std::size_t s = 0; s < seeds; ++s) {
      const auto& m = results[ci * seeds + s];
      a.push_back(m.accuracy.value_or_nan());
      p.push_back(m.tpr.value_or_nan());
      n.push_back(m.tnr.value_or_nan());
    }
    entries.push_back({ci, configs[ci], summarize(a), summarize(p), summarize(n)});
  }
  std::stable_sort(entries.begin(), entries.end(), [](const SweepEntry& x, const SweepEntry& y) {
    const double a = std::isnan(x.val_accuracy.mean) ? -1.0 : x.val_accuracy.mean;
    const double b = std::isnan(y.val_accuracy.mean) ? -1.0 : y.val_accuracy.mean;
    return a > b;
  });
  return entries;
}

}  // namespace camseer::eval
