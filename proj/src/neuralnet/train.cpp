#include <algorithm>
#include <numeric>

#include "camseer/error.hpp"
#include "camseer/neuralnet.hpp"

namespace camseer::nn {

namespace {

std::vector<double> labels_of(std::span<const dataset::LabeledSegment> segments) {
  std::vector<double> y(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) y[i] = segments[i].label;
  return y;
}

}  // namespace

io::json TrainingLog::to_json() const {
  io::json j;
  j["seed"] = seed;
  j["best_epoch"] = best_epoch;
  j["best_val_loss"] = best_val_loss;
  j["stop_reason"] = stop_reason;
  j["epochs"] = io::json::array();
  for (const auto& e : epochs)
    j["epochs"].push_back({{"epoch", e.epoch},
                           {"train_loss", e.train_loss},
                           {"val_loss", e.val_loss},
                           {"val_accuracy", e.val_accuracy},
                           {"lr", e.lr}});
  return j;
}

std::vector<double> predict_probabilities(const NetworkParams& params, const dataset::SegmentStore& store,
                                          std::span<const dataset::LabeledSegment> segments, std::size_t batch_size) {
  std::vector<double> out;
  out.reserve(segments.size());
  for (std::size_t start = 0; start < segments.size(); start += batch_size) {
    const auto part = segments.subspan(start, std::min(batch_size, segments.size() - start));
    const auto res = forward(params, gather_batch(store, part), Mode::Infer);
    out.insert(out.end(), res.probabilities.begin(), res.probabilities.end());
  }
  return out;
}

Prediction predict(const NetworkParams& params, std::span<const double> segment) {
  const std::size_t width = params.config.input_width;
  require(!segment.empty() && segment.size() % width == 0, ErrorKind::ContractViolation,
          "segment size is not a multiple of the input width");
  SequenceBatch b{1, segment.size() / width, width, std::vector<double>(segment.begin(), segment.end())};
  const double p = forward(params, b, Mode::Infer).probabilities.front();
  return {p, classify(p)};
}

TrainResult train_network(const NetworkConfig& config, const dataset::SegmentStore& store,
                          std::span<const dataset::LabeledSegment> train_set,
                          std::span<const dataset::LabeledSegment> val_set) {
  config.validate();
  require(!train_set.empty(), ErrorKind::InvalidParameter, "empty training set");
  require(!val_set.empty(), ErrorKind::InvalidParameter, "empty validation set");

  auto state = TrainState::start(config, ParamLayout::build(config).total);
  NetworkParams params = init_params(config, state.rng);
  NetworkParams best = params;
  EarlyStopping stopper(config.patience);

  TrainResult result;
  result.log.seed = config.seed;
  const auto val_labels = labels_of(val_set);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<dataset::LabeledSegment> batch_segs;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), state.rng);
    double loss_sum = 0.0;
    const double lr_used = state.current_lr;
    for (std::size_t start = 0, bi = 0; start < order.size(); start += config.batch_size, ++bi) {
      const std::size_t n = std::min(config.batch_size, order.size() - start);
      batch_segs.clear();
      for (std::size_t i = 0; i < n; ++i) batch_segs.push_back(train_set[order[start + i]]);
      const auto labels = labels_of(batch_segs);
      try {
        const auto batch = gather_batch(store, batch_segs);
        const auto masks = sample_masks(config, batch.size, batch.steps, state.rng);
        const auto fwd = forward(params, batch, Mode::Train, &masks);
        loss_sum += loss(fwd.probabilities, labels, params, config.l2_lambda) * static_cast<double>(n);
        const auto grads = backward(params, fwd, labels);
        adam_step(params, grads, state);
        update_running_stats(params, fwd.cache);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NumericFailure) throw;
        fail(ErrorKind::NumericFailure,
             std::string(e.what()) + " (epoch " + std::to_string(epoch) + ", batch " + std::to_string(bi) + ")");
      }
    }
    decay_lr(state);

    const auto val_probs = predict_probabilities(params, store, val_set);
    const double val_loss = loss(val_probs, val_labels, params, config.l2_lambda);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < val_probs.size(); ++i) correct += classify(val_probs[i]) == val_set[i].label;

    result.log.epochs.push_back({epoch, loss_sum / static_cast<double>(order.size()), val_loss,
                                 static_cast<double>(correct) / static_cast<double>(val_set.size()), lr_used});
    if (stopper.update(val_loss)) best = params;
    if (stopper.should_stop()) {
      result.log.stop_reason = "early_stopping";
      break;
    }
  }
  if (result.log.stop_reason.empty()) result.log.stop_reason = "max_epochs";
  result.log.best_epoch = stopper.best_epoch();
  result.log.best_val_loss = stopper.best();
  result.params = std::move(best);
  return result;
}

}  // namespace camseer::nn
