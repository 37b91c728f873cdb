#include <cmath>

#include "camseer/error.hpp"
#include "camseer/neuralnet.hpp"

namespace camseer::nn {

ParamLayout ParamLayout::build(const NetworkConfig& config) {
  config.validate();
  const std::size_t layers = config.num_lstm_layers();

  // Stages that carry a BN layer: after block 1, after block 2, then the input.
  std::vector<bool> bn_stage(layers + 1, false);
  std::size_t remaining = config.num_batchnorm;
  for (std::size_t s = 1; s <= layers && remaining > 0; ++s, --remaining) bn_stage[s] = true;
  if (remaining > 0) bn_stage[0] = true;

  ParamLayout out;
  std::size_t off = 0;
  auto stage_width = [&](std::size_t s) { return s == 0 ? config.input_width : config.hidden_sizes[s - 1]; };
  auto add_bn = [&](std::size_t s) {
    const std::size_t w = stage_width(s);
    out.bn.push_back({off, off + w, w, s});
    off += 2 * w;
  };

  if (bn_stage[0]) add_bn(0);
  for (std::size_t k = 0; k < layers; ++k) {
    const std::size_t d = stage_width(k);
    const std::size_t h = config.hidden_sizes[k];
    LstmSlot slot;
    slot.input = d;
    slot.hidden = h;
    slot.w = off;
    off += 4 * h * d;
    slot.u = off;
    off += 4 * h * h;
    slot.b = off;
    off += 4 * h;
    out.lstm.push_back(slot);
    if (bn_stage[k + 1]) add_bn(k + 1);
  }
  out.dense_w = off;
  off += config.hidden_sizes.back();
  out.dense_b = off;
  off += 1;
  out.total = off;
  return out;
}

std::optional<std::size_t> ParamLayout::bn_at(std::size_t stage) const {
  for (std::size_t i = 0; i < bn.size(); ++i)
    if (bn[i].stage == stage) return i;
  return std::nullopt;
}

std::vector<std::pair<std::size_t, std::size_t>> ParamLayout::weight_ranges() const {
  std::vector<std::pair<std::size_t, std::size_t>> r;
  for (const auto& l : lstm) r.emplace_back(l.w, l.b);  // W and U are adjacent
  r.emplace_back(dense_w, dense_b);
  return r;
}

LstmLayerParams NetworkParams::lstm(std::size_t k) const {
  const auto& s = layout.lstm.at(k);
  const std::span<const double> all(values);
  return {s.input, s.hidden, all.subspan(s.w, 4 * s.hidden * s.input), all.subspan(s.u, 4 * s.hidden * s.hidden),
          all.subspan(s.b, 4 * s.hidden)};
}

std::span<const double> NetworkParams::gamma(std::size_t k) const {
  const auto& s = layout.bn.at(k);
  return std::span<const double>(values).subspan(s.gamma, s.width);
}

std::span<const double> NetworkParams::beta(std::size_t k) const {
  const auto& s = layout.bn.at(k);
  return std::span<const double>(values).subspan(s.beta, s.width);
}

std::span<const double> NetworkParams::dense_w() const {
  return std::span<const double>(values).subspan(layout.dense_w, config.hidden_sizes.back());
}

NetworkParams init_params(const NetworkConfig& config, std::mt19937_64& rng) {
  NetworkParams p;
  p.config = config;
  p.layout = ParamLayout::build(config);
  p.values.assign(p.layout.total, 0.0);

  auto fill_normal = [&](std::size_t begin, std::size_t count, double sd) {
    std::normal_distribution<double> dist(0.0, sd);
    for (std::size_t i = 0; i < count; ++i) p.values[begin + i] = dist(rng);
  };

  for (const auto& s : p.layout.lstm) {
    const double sd = std::sqrt(2.0 / static_cast<double>(s.hidden));
    fill_normal(s.w, 4 * s.hidden * s.input, sd);
    fill_normal(s.u, 4 * s.hidden * s.hidden, sd);
  }
  for (const auto& s : p.layout.bn) std::fill_n(p.values.begin() + static_cast<std::ptrdiff_t>(s.gamma), s.width, 1.0);
  const std::size_t h_last = config.hidden_sizes.back();
  fill_normal(p.layout.dense_w, h_last, std::sqrt(2.0 / static_cast<double>(h_last)));

  for (const auto& s : p.layout.bn) p.running.push_back({std::vector<double>(s.width, 0.0), std::vector<double>(s.width, 1.0)});
  return p;
}

SequenceBatch gather_batch(const dataset::SegmentStore& store, std::span<const dataset::LabeledSegment> segments) {
  SequenceBatch b;
  b.size = segments.size();
  b.width = store.width();
  b.steps = segments.empty() ? 0 : segments.front().length;
  b.values.reserve(b.size * b.steps * b.width);
  for (const auto& s : segments) {
    require(s.length == b.steps, ErrorKind::ContractViolation, "segments in a batch must share N");
    const auto w = store.window(s);
    b.values.insert(b.values.end(), w.begin(), w.end());
  }
  return b;
}

DropoutMasks sample_masks(const NetworkConfig& config, std::size_t batch, std::size_t steps, std::mt19937_64& rng) {
  DropoutMasks m;
  const std::size_t layers = config.num_lstm_layers();
  m.output.resize(layers);
  m.recurrent.resize(layers);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto draw = [&](std::vector<double>& mask, std::size_t n, double p) {
    if (p <= 0.0) return;
    mask.resize(n);
    const double keep = 1.0 / (1.0 - p);
    for (double& v : mask) v = u(rng) < p ? 0.0 : keep;
  };
  for (std::size_t k = 0; k < layers; ++k) {
    const std::size_t h = config.hidden_sizes[k];
    draw(m.recurrent[k], batch * h, config.recurrent_dropout[k]);
    draw(m.output[k], batch * steps * h, config.dropout[k]);
  }
  return m;
}

}  // namespace camseer::nn
