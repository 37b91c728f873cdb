#include <charconv>
#include <cmath>
#include <cstdlib>

#include "camseer/error.hpp"
#include "camseer/kernels.hpp"
#include "camseer/neuralnet.hpp"

namespace camseer::nn {

namespace {

// Config values are written in decimal; the shortest round-trip decimal of a
// double recovers that text, and reading it as long double keeps 0.99^k from
// inheriting the double's representation error.
long double decimal_value(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf - 1, x);
  *r.ptr = '\0';
  return std::strtold(buf, nullptr);
}

}  // namespace

TrainState TrainState::start(const NetworkConfig& config, std::size_t num_params) {
  TrainState s;
  s.adam.m.assign(num_params, 0.0);
  s.adam.v.assign(num_params, 0.0);
  s.initial_lr = config.learning_rate;
  s.decay = config.lr_decay;
  s.current_lr = config.learning_rate;
  s.rng.seed(config.seed);
  return s;
}

void adam_step(NetworkParams& params, std::span<const double> grads, TrainState& state) {
  auto& a = state.adam;
  require(grads.size() == params.values.size() && a.m.size() == grads.size() && a.v.size() == grads.size(),
          ErrorKind::ContractViolation, "adam_step shape mismatch");
  ++a.step;
  const double t = static_cast<double>(a.step);
  const double c1 = 1.0 / (1.0 - std::pow(a.beta1, t));
  const double c2 = 1.0 / (1.0 - std::pow(a.beta2, t));
  kernels::active().adam(params.values.data(), grads.data(), a.m.data(), a.v.data(), grads.size(), state.current_lr,
                         a.beta1, a.beta2, a.epsilon, c1, c2);
}

void decay_lr(TrainState& state) {
  ++state.epoch;
  // Closed form of lr_i = decay * lr_{i-1}; avoids drift from repeated products.
  state.current_lr = static_cast<double>(decimal_value(state.initial_lr) *
                                         std::pow(decimal_value(state.decay), static_cast<long double>(state.epoch)));
}

bool EarlyStopping::update(double val_loss) {
  ++epochs_;
  if (val_loss < best_) {
    best_ = val_loss;
    best_epoch_ = epochs_;
    since_improvement_ = 0;
    return true;
  }
  ++since_improvement_;
  return false;
}

}  // namespace camseer::nn
