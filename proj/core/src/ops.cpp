#include "splitlab/nn/ops.hpp"

#include <algorithm>
#include <cmath>

#include "splitlab/errors.hpp"

namespace splitlab::nn {
namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_input(const Layer& layer, std::size_t index, const Tensor& x) {
  if (x.rank() != 2 || x.cols() != layer.input_width) {
    throw DimensionError("layer " + std::to_string(index) + " (" + to_string(layer.spec.kind) +
                         "): expected input width " + std::to_string(layer.input_width) + ", got " +
                         std::to_string(x.rank() == 2 ? x.cols() : 0) + " (rank " +
                         std::to_string(x.rank()) + ")");
  }
}

// out[b,o] = sum_i x[b,i] * w[i,o] + bias[o]
Tensor dense_forward(const Layer& layer, const Tensor& x) {
  const std::size_t batch = x.rows();
  const std::size_t in = layer.spec.in_dim;
  const std::size_t out = layer.spec.out_dim;
  Tensor y = Tensor::matrix(batch, out);
  for (std::size_t b = 0; b < batch; ++b) {
    double* yr = &y(b, 0);
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = x(b, i);
      const double* wr = layer.weights.data().data() + i * out;
      for (std::size_t o = 0; o < out; ++o) yr[o] += xi * wr[o];
    }
    for (std::size_t o = 0; o < out; ++o) yr[o] += layer.bias[o];
  }
  return y;
}

Tensor layer_forward(const Layer& layer, const Tensor& x) {
  switch (layer.spec.kind) {
    case LayerKind::dense: return dense_forward(layer, x);
    case LayerKind::relu: {
      Tensor y = x;
      for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
      return y;
    }
    case LayerKind::sigmoid: {
      Tensor y = x;
      for (double& v : y.data()) v = sigmoid(v);
      return y;
    }
  }
  return x;
}

}  // namespace

ForwardResult forward(const SequentialModel& model, const Tensor& input) {
  ForwardResult result;
  result.cache.model_version = model.version();
  result.cache.layer_inputs.reserve(model.num_layers());
  Tensor current = input;
  if (model.empty() && current.rank() != 2) {
    throw DimensionError("forward: input must be rank 2");
  }
  for (std::size_t k = 0; k < model.num_layers(); ++k) {
    const Layer& layer = model.layers()[k];
    check_input(layer, k, current);
    Tensor next = layer_forward(layer, current);
    result.cache.layer_inputs.push_back(std::move(current));
    current = std::move(next);
  }
  if (!current.all_finite()) throw NumericError("forward: non-finite output");
  result.cache.output = current;
  result.output = std::move(current);
  return result;
}

Tensor predict(const SequentialModel& model, const Tensor& input) {
  Tensor current = input;
  for (std::size_t k = 0; k < model.num_layers(); ++k) {
    const Layer& layer = model.layers()[k];
    check_input(layer, k, current);
    current = layer_forward(layer, current);
  }
  if (!current.all_finite()) throw NumericError("predict: non-finite output");
  return current;
}

BackwardResult backward(const SequentialModel& model, const ForwardCache& cache,
                        const Tensor& output_grad) {
  if (cache.model_version != model.version() ||
      cache.layer_inputs.size() != model.num_layers()) {
    throw ProtocolError("backward: stale forward cache (parameters changed since forward)");
  }
  if (!output_grad.same_shape(cache.output)) {
    throw DimensionError("backward: output gradient shape does not match forward output");
  }

  BackwardResult result;
  result.param_grads = zero_gradients(model);
  std::size_t param_slot = result.param_grads.size();

  Tensor grad = output_grad;
  for (std::size_t k = model.num_layers(); k-- > 0;) {
    const Layer& layer = model.layers()[k];
    const Tensor& x = cache.layer_inputs[k];
    const std::size_t batch = x.rows();
    switch (layer.spec.kind) {
      case LayerKind::relu: {
        for (std::size_t i = 0; i < grad.size(); ++i) {
          if (!(x[i] > 0.0)) grad[i] = 0.0;
        }
        break;
      }
      case LayerKind::sigmoid: {
        const Tensor& y = (k + 1 < model.num_layers()) ? cache.layer_inputs[k + 1] : cache.output;
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= y[i] * (1.0 - y[i]);
        break;
      }
      case LayerKind::dense: {
        const std::size_t in = layer.spec.in_dim;
        const std::size_t out = layer.spec.out_dim;
        param_slot -= 2;
        Tensor& dw = result.param_grads[param_slot];
        Tensor& db = result.param_grads[param_slot + 1];
        Tensor dx = Tensor::matrix(batch, in);
        for (std::size_t b = 0; b < batch; ++b) {
          const double* gr = grad.data().data() + b * out;
          for (std::size_t i = 0; i < in; ++i) {
            const double xi = x(b, i);
            double* dwr = &dw(i, 0);
            const double* wr = layer.weights.data().data() + i * out;
            double acc = 0.0;
            for (std::size_t o = 0; o < out; ++o) {
              dwr[o] += xi * gr[o];
              acc += gr[o] * wr[o];
            }
            dx(b, i) = acc;
          }
          for (std::size_t o = 0; o < out; ++o) db[o] += gr[o];
        }
        grad = std::move(dx);
        break;
      }
    }
  }
  for (const auto& g : result.param_grads) {
    if (!g.all_finite()) throw NumericError("backward: non-finite parameter gradient");
  }
  if (!grad.all_finite()) throw NumericError("backward: non-finite input gradient");
  result.input_grad = std::move(grad);
  return result;
}

namespace {

void check_loss_inputs(const Tensor& predictions, const Tensor& labels) {
  if (predictions.rank() != 2 || predictions.cols() != 1 || !predictions.same_shape(labels)) {
    throw DimensionError("bce_loss: predictions and labels must both be [batch, 1]");
  }
  if (predictions.rows() == 0) throw ValidationError("bce_loss: empty batch");
  for (double y : labels.data()) {
    if (y != 0.0 && y != 1.0) throw ValidationError("bce_loss: label not in {0,1}");
  }
}

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

double bce_term(double p, double y) {
  const double q = clamp_prob(p);
  return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

}  // namespace

LossResult bce_loss(const Tensor& predictions, const Tensor& labels) {
  check_loss_inputs(predictions, labels);
  const std::size_t n = predictions.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  LossResult r;
  r.grad = Tensor::matrix(n, 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = predictions[i];
    const double y = labels[i];
    sum += bce_term(p, y);
    const double q = clamp_prob(p);
    // d/dp of the clamped loss is zero outside the clamp window.
    const bool clamped = q != p;
    r.grad[i] = clamped ? 0.0 : inv_n * (q - y) / (q * (1.0 - q));
  }
  r.loss = sum * inv_n;
  return r;
}

double bce_sum(const Tensor& predictions, const Tensor& labels, double running) {
  check_loss_inputs(predictions, labels);
  double sum = running;
  for (std::size_t i = 0; i < predictions.rows(); ++i) sum += bce_term(predictions[i], labels[i]);
  return sum;
}

Gradients zero_gradients(const SequentialModel& model) {
  Gradients g;
  for (const Tensor* p : model.parameters()) g.emplace_back(p->shape(), 0.0);
  return g;
}

}  // namespace splitlab::nn
