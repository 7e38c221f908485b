#pragma once

#include <cstdint>
#include <vector>

#include "splitlab/nn/model.hpp"
#include "splitlab/nn/tensor.hpp"

namespace splitlab::nn {

/// Inputs seen by every layer during one forward pass.
struct ForwardCache {
  std::uint64_t model_version = 0;
  std::vector<Tensor> layer_inputs;
  Tensor output;
};

struct ForwardResult {
  Tensor output;
  ForwardCache cache;
};

/// One gradient tensor per parameter tensor, aligned with
/// SequentialModel::parameters().
using Gradients = std::vector<Tensor>;

struct BackwardResult {
  Gradients param_grads;
  Tensor input_grad;
};

struct LossResult {
  double loss = 0.0;
  Tensor grad;  // dLoss/dPrediction
};

/// Predictions are clamped to [kProbClamp, 1 - kProbClamp] before the log.
inline constexpr double kProbClamp = 1e-12;

ForwardResult forward(const SequentialModel& model, const Tensor& input);

/// Forward pass without keeping a cache.
Tensor predict(const SequentialModel& model, const Tensor& input);

BackwardResult backward(const SequentialModel& model, const ForwardCache& cache,
                        const Tensor& output_grad);

/// Mean binary cross-entropy over the batch.
LossResult bce_loss(const Tensor& predictions, const Tensor& labels);

/// Adds every per-sample BCE term onto `running` in row order. Chaining calls
/// gives the same sum regardless of how rows were batched.
double bce_sum(const Tensor& predictions, const Tensor& labels, double running = 0.0);

/// Zero gradients shaped like the model's parameters.
Gradients zero_gradients(const SequentialModel& model);

}  // namespace splitlab::nn
