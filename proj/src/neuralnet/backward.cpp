#include <algorithm>
#include <cmath>

#include "camseer/error.hpp"
#include "camseer/kernels.hpp"
#include "camseer/neuralnet.hpp"

namespace camseer::nn {

namespace {

// Gradient through a train-mode batch normalization over M = B*T rows.
// Overwrites dy with dx and accumulates dgamma/dbeta.
void batchnorm_backward(const BatchNormCache& bc, std::span<const double> gamma, std::vector<double>& dy,
                        std::size_t rows, std::span<double> dgamma, std::span<double> dbeta) {
  const std::size_t f = gamma.size();
  std::vector<double> sum_dxhat(f, 0.0);
  std::vector<double> sum_dxhat_xhat(f, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < f; ++j) {
      const double g = dy[r * f + j];
      const double xh = bc.xhat[r * f + j];
      dgamma[j] += g * xh;
      dbeta[j] += g;
      const double dxh = g * gamma[j];
      sum_dxhat[j] += dxh;
      sum_dxhat_xhat[j] += dxh * xh;
    }
  const double m = static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < f; ++j) {
      const double dxh = dy[r * f + j] * gamma[j];
      dy[r * f + j] =
          bc.inv_std[j] / m * (m * dxh - sum_dxhat[j] - bc.xhat[r * f + j] * sum_dxhat_xhat[j]);
    }
}

}  // namespace

std::vector<double> backward(const NetworkParams& params, const ForwardResult& fwd, std::span<const double> labels) {
  const auto& cache = fwd.cache;
  const auto& layout = params.layout;
  require(cache.mode == Mode::Train, ErrorKind::ContractViolation, "backward needs a train-mode forward cache");
  require(cache.layers.size() == layout.lstm.size() && labels.size() == cache.batch &&
              fwd.probabilities.size() == cache.batch,
          ErrorKind::ContractViolation, "stale or mismatched forward cache");

  const auto& kern = kernels::active();
  const std::size_t B = cache.batch;
  const std::size_t T = cache.steps;
  const std::size_t rows = B * T;
  std::vector<double> grad(layout.total, 0.0);

  // Dense head.
  const std::size_t H_last = params.config.hidden_sizes.back();
  const auto w = params.dense_w();
  std::vector<double> dseq(rows * H_last, 0.0);
  for (std::size_t b = 0; b < B; ++b) {
    const double dlogit = (fwd.probabilities[b] - labels[b]) / static_cast<double>(B);
    grad[layout.dense_b] += dlogit;
    kern.axpy(dlogit, cache.final_hidden.data() + b * H_last, grad.data() + layout.dense_w, H_last);
    kern.axpy(dlogit, w.data(), dseq.data() + (b * T + T - 1) * H_last, H_last);
  }

  auto bn_back = [&](std::size_t stage) {
    if (auto bn = layout.bn_at(stage)) {
      const auto& slot = layout.bn[*bn];
      batchnorm_backward(cache.bns[*bn], params.gamma(*bn), dseq, rows,
                         std::span<double>(grad.data() + slot.gamma, slot.width),
                         std::span<double>(grad.data() + slot.beta, slot.width));
    }
  };

  for (std::size_t kk = layout.lstm.size(); kk-- > 0;) {
    bn_back(kk + 1);
    const auto& lc = cache.layers[kk];
    const auto layer = params.lstm(kk);
    const auto& slot = layout.lstm[kk];
    const std::size_t H = layer.hidden;
    const std::size_t D = layer.input;

    if (!cache.masks.output.empty() && !cache.masks.output[kk].empty()) {
      const auto& m = cache.masks.output[kk];
      for (std::size_t i = 0; i < dseq.size(); ++i) dseq[i] *= m[i];
    }
    const std::vector<double>* rec =
        !cache.masks.recurrent.empty() && !cache.masks.recurrent[kk].empty() ? &cache.masks.recurrent[kk] : nullptr;

    double* dW = grad.data() + slot.w;
    double* dU = grad.data() + slot.u;
    double* db = grad.data() + slot.b;
    std::vector<double> dinput(rows * D, 0.0);
    std::vector<double> dh_next(H), dc_next(H), dz(4 * H), dhm(H), hm(H);

    for (std::size_t b = 0; b < B; ++b) {
      std::fill(dh_next.begin(), dh_next.end(), 0.0);
      std::fill(dc_next.begin(), dc_next.end(), 0.0);
      const double* mask = rec ? rec->data() + b * H : nullptr;
      for (std::size_t t = T; t-- > 0;) {
        const std::size_t r = b * T + t;
        const double* gates = lc.gates.data() + r * 4 * H;
        const double* c = lc.cell.data() + r * H;
        const double* c_prev = t > 0 ? lc.cell.data() + (r - 1) * H : nullptr;
        const double* dh_out = dseq.data() + r * H;
        for (std::size_t j = 0; j < H; ++j) {
          const double i = gates[j], f = gates[H + j], g = gates[2 * H + j], o = gates[3 * H + j];
          const double dh = dh_out[j] + dh_next[j];
          const double tc = std::tanh(c[j]);
          const double dc = dc_next[j] + dh * o * (1.0 - tc * tc);
          const double cp = c_prev ? c_prev[j] : 0.0;
          dz[j] = dc * g * i * (1.0 - i);
          dz[H + j] = dc * cp * f * (1.0 - f);
          dz[2 * H + j] = dc * i * (1.0 - g * g);
          dz[3 * H + j] = dh * tc * o * (1.0 - o);
          dc_next[j] = dc * f;
        }
        kern.ger(dW, 4 * H, D, dz.data(), lc.input.data() + r * D);
        kern.axpy(1.0, dz.data(), db, 4 * H);
        kern.gemv_t(layer.W.data(), 4 * H, D, dz.data(), dinput.data() + r * D);
        if (t > 0) {
          const double* h_prev = lc.hidden.data() + (r - 1) * H;
          for (std::size_t j = 0; j < H; ++j) hm[j] = mask ? h_prev[j] * mask[j] : h_prev[j];
          kern.ger(dU, 4 * H, H, dz.data(), hm.data());
          std::fill(dhm.begin(), dhm.end(), 0.0);
          kern.gemv_t(layer.U.data(), 4 * H, H, dz.data(), dhm.data());
          for (std::size_t j = 0; j < H; ++j) dh_next[j] = mask ? dhm[j] * mask[j] : dhm[j];
        }
      }
    }
    dseq = std::move(dinput);
  }
  bn_back(0);

  const double lambda = params.config.l2_lambda;
  if (lambda > 0.0)
    for (const auto& [begin, end] : layout.weight_ranges())
      for (std::size_t i = begin; i < end; ++i) grad[i] += 2.0 * lambda * params.values[i];
  return grad;
}

}  // namespace camseer::nn
