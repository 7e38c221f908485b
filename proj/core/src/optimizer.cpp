#include "splitlab/nn/optimizer.hpp"

#include <cmath>

#include "splitlab/errors.hpp"

namespace splitlab::nn {

void OptimizerConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ValidationError("optimizer.learning_rate must be >= 0");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ValidationError("optimizer.beta1 must be in (0,1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ValidationError("optimizer.beta2 must be in (0,1)");
  if (!(epsilon > 0.0)) throw ValidationError("optimizer.epsilon must be > 0");
}

namespace {

void check_shapes(std::span<Tensor* const> params, std::span<const Tensor> grads) {
  if (params.size() != grads.size()) {
    throw ValidationError("optimizer: " + std::to_string(params.size()) + " parameters but " +
                          std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->same_shape(grads[i])) {
      throw ValidationError("optimizer: gradient " + std::to_string(i) +
                            " shape does not match its parameter");
    }
  }
}

}  // namespace

void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
               const OptimizerConfig& cfg) {
  check_shapes(params, grads);
  if (state.step_count == 0 && state.first_moment.empty()) {
    for (const Tensor* p : params) {
      state.first_moment.emplace_back(p->shape(), 0.0);
      state.second_moment.emplace_back(p->shape(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw ValidationError("adam: moment count does not match parameter count");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!state.first_moment[i].same_shape(*params[i]) ||
        !state.second_moment[i].same_shape(*params[i])) {
      throw ValidationError("adam: moment shape does not match parameter " + std::to_string(i));
    }
  }

  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->data();
    auto g = grads[i].data();
    auto m = state.first_moment[i].data();
    auto v = state.second_moment[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p[j] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

void sgd_step(std::span<Tensor* const> params, std::span<const Tensor> grads, double learning_rate) {
  check_shapes(params, grads);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->data();
    auto g = grads[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) p[j] -= learning_rate * g[j];
  }
}

Optimizer::Optimizer(OptimizerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void Optimizer::step(SequentialModel& model, const Gradients& grads) {
  if (model.param_count() == 0) return;
  auto params = model.mutable_parameters();
  if (cfg_.kind == OptimizerKind::adam) {
    adam_step(params, grads, state_, cfg_);
  } else {
    sgd_step(params, grads, cfg_.learning_rate);
  }
}

}  // namespace splitlab::nn
