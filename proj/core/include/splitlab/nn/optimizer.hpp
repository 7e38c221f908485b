#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "splitlab/nn/model.hpp"
#include "splitlab/nn/ops.hpp"
#include "splitlab/nn/tensor.hpp"

namespace splitlab::nn {

enum class OptimizerKind { adam, sgd };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step_count = 0;
};

/// Bias-corrected Adam. Moments are created on the first call.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
               const OptimizerConfig& cfg);

/// Plain gradient descent: p <- p - lr * g.
void sgd_step(std::span<Tensor* const> params, std::span<const Tensor> grads, double learning_rate);

/// Optimizer bound to one model segment.
class Optimizer {
 public:
  Optimizer() = default;
  explicit Optimizer(OptimizerConfig cfg);

  void step(SequentialModel& model, const Gradients& grads);
  void reset() { state_ = {}; }

  const OptimizerConfig& config() const noexcept { return cfg_; }
  const AdamState& state() const noexcept { return state_; }

 private:
  OptimizerConfig cfg_;
  AdamState state_;
};

}  // namespace splitlab::nn
