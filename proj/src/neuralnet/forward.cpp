#include <algorithm>
#include <cmath>

#include "camseer/error.hpp"
#include "camseer/kernels.hpp"
#include "camseer/neuralnet.hpp"

namespace camseer::nn {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_finite(std::span<const double> v, const std::string& where) {
  for (double x : v)
    if (!std::isfinite(x)) fail(ErrorKind::NumericFailure, "non-finite activation in " + where);
}

// Normalizes a B*T*F sequence per feature in place.
void batchnorm_forward(const NetworkParams& params, std::size_t k, std::vector<double>& seq, std::size_t rows,
                       Mode mode, BatchNormCache& cache) {
  const std::size_t f = params.layout.bn[k].width;
  const auto gamma = params.gamma(k);
  const auto beta = params.beta(k);
  const double eps = params.config.bn_epsilon;

  cache.mean.assign(f, 0.0);
  cache.var.assign(f, 0.0);
  cache.inv_std.assign(f, 0.0);
  if (mode == Mode::Train) {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < f; ++j) cache.mean[j] += seq[r * f + j];
    for (double& m : cache.mean) m /= static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < f; ++j) {
        const double d = seq[r * f + j] - cache.mean[j];
        cache.var[j] += d * d;
      }
    for (double& v : cache.var) v /= static_cast<double>(rows);
  } else {
    cache.mean = params.running[k].mean;
    cache.var = params.running[k].var;
  }
  for (std::size_t j = 0; j < f; ++j) cache.inv_std[j] = 1.0 / std::sqrt(cache.var[j] + eps);

  cache.xhat.resize(rows * f);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < f; ++j) {
      const double xh = (seq[r * f + j] - cache.mean[j]) * cache.inv_std[j];
      cache.xhat[r * f + j] = xh;
      seq[r * f + j] = gamma[j] * xh + beta[j];
    }
}

}  // namespace

void lstm_cell_step(const LstmLayerParams& layer, std::span<const double> x, std::span<const double> h_prev,
                    std::span<const double> c_prev, std::span<const double> rec_mask, std::span<double> h,
                    std::span<double> c, std::span<double> gates) {
  const std::size_t H = layer.hidden;
  const std::size_t D = layer.input;
  require(x.size() == D && h_prev.size() == H && c_prev.size() == H && h.size() == H && c.size() == H &&
              gates.size() == 4 * H && (rec_mask.empty() || rec_mask.size() == H),
          ErrorKind::ContractViolation, "lstm_cell_step shape mismatch");
  const auto& k = kernels::active();

  std::copy(layer.b.begin(), layer.b.end(), gates.begin());
  k.gemv(layer.W.data(), 4 * H, D, x.data(), gates.data());
  if (rec_mask.empty()) {
    k.gemv(layer.U.data(), 4 * H, H, h_prev.data(), gates.data());
  } else {
    thread_local std::vector<double> hm;
    hm.resize(H);
    for (std::size_t j = 0; j < H; ++j) hm[j] = h_prev[j] * rec_mask[j];
    k.gemv(layer.U.data(), 4 * H, H, hm.data(), gates.data());
  }
  for (std::size_t j = 0; j < H; ++j) {
    const double i = sigmoid(gates[j]);
    const double f = sigmoid(gates[H + j]);
    const double g = std::tanh(gates[2 * H + j]);
    const double o = sigmoid(gates[3 * H + j]);
    gates[j] = i;
    gates[H + j] = f;
    gates[2 * H + j] = g;
    gates[3 * H + j] = o;
    c[j] = f * c_prev[j] + i * g;
    h[j] = o * std::tanh(c[j]);
  }
}

ForwardResult forward(const NetworkParams& params, const SequenceBatch& batch, Mode mode, const DropoutMasks* masks) {
  const auto& cfg = params.config;
  const auto& layout = params.layout;
  require(batch.width == cfg.input_width, ErrorKind::ContractViolation,
          "batch width " + std::to_string(batch.width) + " != network input width " + std::to_string(cfg.input_width));
  require(batch.values.size() == batch.size * batch.steps * batch.width && batch.steps > 0,
          ErrorKind::ContractViolation, "malformed sequence batch");

  const std::size_t B = batch.size;
  const std::size_t T = batch.steps;
  const std::size_t rows = B * T;

  ForwardResult res;
  auto& cache = res.cache;
  cache.mode = mode;
  cache.batch = B;
  cache.steps = T;
  cache.layers.resize(layout.lstm.size());
  cache.bns.resize(layout.bn.size());
  if (mode == Mode::Train && masks) cache.masks = *masks;
  const bool use_masks = mode == Mode::Train && masks != nullptr;

  std::vector<double> seq = batch.values;
  if (auto bn = layout.bn_at(0)) {
    batchnorm_forward(params, *bn, seq, rows, mode, cache.bns[*bn]);
    check_finite(seq, "batch normalization 0");
  }

  std::vector<double> zeros;
  for (std::size_t k = 0; k < layout.lstm.size(); ++k) {
    const auto layer = params.lstm(k);
    const std::size_t H = layer.hidden;
    const std::size_t D = layer.input;
    auto& lc = cache.layers[k];
    lc.input = std::move(seq);
    lc.gates.assign(rows * 4 * H, 0.0);
    lc.cell.assign(rows * H, 0.0);
    lc.hidden.assign(rows * H, 0.0);
    zeros.assign(H, 0.0);

    const std::vector<double>* rec = use_masks && !cache.masks.recurrent[k].empty() ? &cache.masks.recurrent[k] : nullptr;
    for (std::size_t b = 0; b < B; ++b) {
      const std::span<const double> mask = rec ? std::span<const double>(rec->data() + b * H, H) : std::span<const double>{};
      for (std::size_t t = 0; t < T; ++t) {
        const std::size_t r = b * T + t;
        const std::span<const double> h_prev =
            t == 0 ? std::span<const double>(zeros) : std::span<const double>(lc.hidden.data() + (r - 1) * H, H);
        const std::span<const double> c_prev =
            t == 0 ? std::span<const double>(zeros) : std::span<const double>(lc.cell.data() + (r - 1) * H, H);
        lstm_cell_step(layer, std::span<const double>(lc.input.data() + r * D, D), h_prev, c_prev, mask,
                       std::span<double>(lc.hidden.data() + r * H, H), std::span<double>(lc.cell.data() + r * H, H),
                       std::span<double>(lc.gates.data() + r * 4 * H, 4 * H));
      }
    }
    check_finite(lc.hidden, "LSTM layer " + std::to_string(k + 1));

    seq = lc.hidden;
    if (use_masks && !cache.masks.output[k].empty()) {
      const auto& m = cache.masks.output[k];
      for (std::size_t i = 0; i < seq.size(); ++i) seq[i] *= m[i];
    }
    if (auto bn = layout.bn_at(k + 1)) {
      batchnorm_forward(params, *bn, seq, rows, mode, cache.bns[*bn]);
      check_finite(seq, "batch normalization " + std::to_string(k + 1));
    }
  }

  const std::size_t H = cfg.hidden_sizes.back();
  cache.final_hidden.resize(B * H);
  for (std::size_t b = 0; b < B; ++b)
    std::copy_n(seq.begin() + static_cast<std::ptrdiff_t>((b * T + T - 1) * H), H,
                cache.final_hidden.begin() + static_cast<std::ptrdiff_t>(b * H));

  const auto w = params.dense_w();
  res.logits.resize(B);
  res.probabilities.resize(B);
  for (std::size_t b = 0; b < B; ++b) {
    res.logits[b] = kernels::active().dot(w.data(), cache.final_hidden.data() + b * H, H) + params.dense_b();
    res.probabilities[b] = sigmoid(res.logits[b]);
  }
  check_finite(res.probabilities, "dense output");
  return res;
}

ForwardResult forward(const NetworkParams& params, const SequenceBatch& batch, Mode mode, std::mt19937_64& rng) {
  if (mode == Mode::Infer) return forward(params, batch, mode, nullptr);
  const auto masks = sample_masks(params.config, batch.size, batch.steps, rng);
  return forward(params, batch, mode, &masks);
}

double l2_penalty(const NetworkParams& params) {
  double s = 0.0;
  for (const auto& [begin, end] : params.layout.weight_ranges())
    for (std::size_t i = begin; i < end; ++i) s += params.values[i] * params.values[i];
  return s;
}

double loss(std::span<const double> probabilities, std::span<const double> labels, const NetworkParams& params,
            double l2_lambda) {
  require(probabilities.size() == labels.size() && !labels.empty(), ErrorKind::ContractViolation,
          "loss needs equally sized, non-empty probabilities and labels");
  double bce = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = std::clamp(probabilities[i], 1e-12, 1.0 - 1e-12);
    bce -= labels[i] * std::log(p) + (1.0 - labels[i]) * std::log(1.0 - p);
  }
  bce /= static_cast<double>(labels.size());
  return l2_lambda > 0.0 ? bce + l2_lambda * l2_penalty(params) : bce;
}

void update_running_stats(NetworkParams& params, const ForwardCache& cache) {
  require(cache.mode == Mode::Train, ErrorKind::ContractViolation, "running statistics need a train-mode forward");
  const double mom = params.config.bn_momentum;
  for (std::size_t k = 0; k < params.running.size(); ++k) {
    auto& rs = params.running[k];
    const auto& bc = cache.bns[k];
    for (std::size_t j = 0; j < rs.mean.size(); ++j) {
      rs.mean[j] = mom * rs.mean[j] + (1.0 - mom) * bc.mean[j];
      rs.var[j] = mom * rs.var[j] + (1.0 - mom) * bc.var[j];
    }
  }
}

}  // namespace camseer::nn
