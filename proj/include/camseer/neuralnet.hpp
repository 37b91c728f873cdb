#pragma once

// LSTM sequence classifier trained from scratch in double precision.
//
// Architecture, per sequence of T steps:
//   [BN on input]? -> LSTM_1 -> dropout -> [BN]? -> LSTM_2 -> dropout -> [BN]?
//   -> last hidden state -> dense -> sigmoid
// Batch normalization layers occupy the slots after LSTM blocks first (slot 1
// is the one between the two blocks); with a single LSTM layer a second BN
// goes on the input. Gates are ordered i, f, g, o in every weight matrix.

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "camseer/dataset.hpp"
#include "camseer/io.hpp"

namespace camseer::nn {

struct NetworkConfig {
  std::size_t input_width = dataset::kFeatureWidth;
  std::vector<std::size_t> hidden_sizes{1100, 300};
  std::vector<double> dropout{0.2, 0.2};
  std::vector<double> recurrent_dropout{0.0, 0.0};
  std::size_t num_batchnorm = 1;
  double l2_lambda = 1e-3;
  double learning_rate = 1e-4;
  double lr_decay = 0.99;
  std::size_t batch_size = 128;
  std::size_t max_epochs = 100;
  std::size_t patience = 3;
  std::uint64_t seed = 0;
  std::size_t segment_length = 50;
  double bn_momentum = 0.99;
  double bn_epsilon = 1e-3;

  std::size_t num_lstm_layers() const { return hidden_sizes.size(); }
  // Throws InvalidParameter on any violated invariant.
  void validate() const;

  // Two LSTM layers (1100, 300), dropout 0.2, no recurrent dropout, one BN,
  // L2 1e-3, Adam at 1e-4 decayed by 0.99 per epoch, batch 128, patience 3.
  static NetworkConfig final_architecture();

  io::json to_json() const;
  static NetworkConfig from_json(const io::json& j);
};

struct LstmSlot {
  std::size_t w = 0, u = 0, b = 0;  // offsets into the flat parameter vector
  std::size_t input = 0, hidden = 0;
};

struct BatchNormSlot {
  std::size_t gamma = 0, beta = 0;
  std::size_t width = 0;
  std::size_t stage = 0;  // 0 = network input, k = after LSTM block k
};

// Offsets of every trainable tensor, in forward order.
struct ParamLayout {
  std::vector<LstmSlot> lstm;
  std::vector<BatchNormSlot> bn;
  std::size_t dense_w = 0, dense_b = 0;
  std::size_t total = 0;

  static ParamLayout build(const NetworkConfig& config);
  // Index into `bn` of the layer sitting at `stage`, if any.
  std::optional<std::size_t> bn_at(std::size_t stage) const;
  // [begin, end) ranges subject to L2: W, U and the dense weights.
  std::vector<std::pair<std::size_t, std::size_t>> weight_ranges() const;
};

struct RunningStats {
  std::vector<double> mean;
  std::vector<double> var;
};

// Read-only view of one LSTM layer: W is 4H x D, U is 4H x H, b is 4H.
struct LstmLayerParams {
  std::size_t input = 0;
  std::size_t hidden = 0;
  std::span<const double> W;
  std::span<const double> U;
  std::span<const double> b;
};

struct NetworkParams {
  NetworkConfig config;
  ParamLayout layout;
  std::vector<double> values;          // all trainable parameters
  std::vector<RunningStats> running;   // one per BN layer

  LstmLayerParams lstm(std::size_t k) const;
  std::span<const double> gamma(std::size_t k) const;
  std::span<const double> beta(std::size_t k) const;
  std::span<const double> dense_w() const;
  double dense_b() const { return values[layout.dense_b]; }
};

// Weights ~ N(0, sqrt(2 / layer size)) per layer, biases zero, BN identity.
NetworkParams init_params(const NetworkConfig& config, std::mt19937_64& rng);

// B sequences of T steps and `width` features, laid out [b][t][f].
struct SequenceBatch {
  std::size_t size = 0;
  std::size_t steps = 0;
  std::size_t width = 0;
  std::vector<double> values;

  const double* at(std::size_t b, std::size_t t) const { return values.data() + (b * steps + t) * width; }
};

SequenceBatch gather_batch(const dataset::SegmentStore& store, std::span<const dataset::LabeledSegment> segments);

// Multiplicative masks (0 or 1/(1-p)); an empty vector means identity.
struct DropoutMasks {
  std::vector<std::vector<double>> output;     // per layer, B*T*H
  std::vector<std::vector<double>> recurrent;  // per layer, B*H, fixed over time
};

DropoutMasks sample_masks(const NetworkConfig& config, std::size_t batch, std::size_t steps, std::mt19937_64& rng);

// One LSTM step for one sequence. `gates` receives the activated i, f, g, o
// (4H values). rec_mask, when non-empty, scales h_prev in the recurrent term.
void lstm_cell_step(const LstmLayerParams& layer, std::span<const double> x, std::span<const double> h_prev,
                    std::span<const double> c_prev, std::span<const double> rec_mask, std::span<double> h,
                    std::span<double> c, std::span<double> gates);

enum class Mode { Train, Infer };

struct LayerCache {
  std::vector<double> input;   // B*T*D, what the LSTM consumed
  std::vector<double> gates;   // B*T*4H activated
  std::vector<double> cell;    // B*T*H
  std::vector<double> hidden;  // B*T*H before dropout
};

struct BatchNormCache {
  std::vector<double> xhat;  // B*T*F
  std::vector<double> mean;
  std::vector<double> var;
  std::vector<double> inv_std;
};

struct ForwardCache {
  Mode mode = Mode::Infer;
  std::size_t batch = 0;
  std::size_t steps = 0;
  std::vector<LayerCache> layers;
  std::vector<BatchNormCache> bns;  // indexed like ParamLayout::bn
  std::vector<double> final_hidden;  // B*H_last fed to the dense head
  DropoutMasks masks;
};

struct ForwardResult {
  std::vector<double> probabilities;
  std::vector<double> logits;
  ForwardCache cache;
};

// Train mode applies the given masks (none = no dropout) and normalizes with
// batch statistics; infer mode uses running statistics and no dropout.
ForwardResult forward(const NetworkParams& params, const SequenceBatch& batch, Mode mode,
                      const DropoutMasks* masks = nullptr);
// Train-mode forward that draws fresh masks from rng.
ForwardResult forward(const NetworkParams& params, const SequenceBatch& batch, Mode mode, std::mt19937_64& rng);

// Mean binary cross-entropy (probabilities clamped to [1e-12, 1-1e-12]) plus
// l2_lambda times the squared norm of W, U and dense weights.
double loss(std::span<const double> probabilities, std::span<const double> labels, const NetworkParams& params,
            double l2_lambda);
double l2_penalty(const NetworkParams& params);

// Gradient of `loss` (with params.config.l2_lambda) over every trainable
// parameter, laid out like NetworkParams::values.
std::vector<double> backward(const NetworkParams& params, const ForwardResult& fwd, std::span<const double> labels);

// Folds the batch statistics of a train-mode forward into the running ones.
void update_running_stats(NetworkParams& params, const ForwardCache& cache);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainState {
  AdamState adam;
  double initial_lr = 1e-4;
  double decay = 0.99;
  double current_lr = 1e-4;
  std::size_t epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t epochs_since_improvement = 0;
  std::mt19937_64 rng;

  static TrainState start(const NetworkConfig& config, std::size_t num_params);
};

void adam_step(NetworkParams& params, std::span<const double> grads, TrainState& state);

// current_lr = initial_lr * decay^epoch after advancing the epoch counter.
void decay_lr(TrainState& state);

class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}
  // Records one epoch's validation loss; returns true when it improved.
  bool update(double val_loss);
  bool should_stop() const { return since_improvement_ >= patience_; }
  double best() const { return best_; }
  std::size_t best_epoch() const { return best_epoch_; }
  std::size_t epochs() const { return epochs_; }

 private:
  std::size_t patience_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t best_epoch_ = 0;
  std::size_t since_improvement_ = 0;
  std::size_t epochs_ = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double lr = 0.0;
};

struct TrainingLog {
  std::uint64_t seed = 0;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  std::string stop_reason;

  io::json to_json() const;
};

struct TrainResult {
  NetworkParams params;
  TrainingLog log;
};

// Mini-batch Adam over freshly shuffled data each epoch, exponential LR decay,
// early stopping on validation loss. Returns the best-validation parameters.
TrainResult train_network(const NetworkConfig& config, const dataset::SegmentStore& store,
                          std::span<const dataset::LabeledSegment> train_set,
                          std::span<const dataset::LabeledSegment> val_set);

struct Prediction {
  double probability = 0.5;
  int label = 1;
};

// class 1 iff probability >= 0.5
Prediction predict(const NetworkParams& params, std::span<const double> segment);
std::vector<double> predict_probabilities(const NetworkParams& params, const dataset::SegmentStore& store,
                                          std::span<const dataset::LabeledSegment> segments,
                                          std::size_t batch_size = 256);
inline int classify(double probability) { return probability >= 0.5 ? 1 : 0; }

// "CNET" model container: header, config block, tensors (LSTM1 W,U,b; BN
// gamma,beta,running mean,running var; LSTM2 ...; dense w, dense b) as
// little-endian doubles in forward order, then a normalization reference string.
std::vector<std::uint8_t> save_model(const NetworkParams& params, const std::string& norm_reference = {});
struct LoadedModel {
  NetworkParams params;
  std::string norm_reference;
};
LoadedModel load_model(std::span<const std::uint8_t> bytes);

}  // namespace camseer::nn
