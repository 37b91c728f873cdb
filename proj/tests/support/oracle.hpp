#pragma once

// Reference implementations written without the library's layout, kernels or
// caches. They index the flat parameter vector by the documented tensor order.

#include <functional>
#include <vector>

#include "camseer/neuralnet.hpp"

namespace oracle {

// Scalar-loop network forward. Input is [b][t][f]; masks follow the
// DropoutMasks layout and may be null. Returns one probability per sequence.
std::vector<double> forward(const camseer::nn::NetworkConfig& cfg, const std::vector<double>& values,
                            const std::vector<camseer::nn::RunningStats>& running, const std::vector<double>& input,
                            std::size_t batch, std::size_t steps, bool train,
                            const camseer::nn::DropoutMasks* masks = nullptr);

// Central differences of f at x, one coordinate at a time.
std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double step);

// max_i |a - n| / max(|a|, |n|, floor)
double max_relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric,
                          double floor = 1e-6);

}  // namespace oracle
