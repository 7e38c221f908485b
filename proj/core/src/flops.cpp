#include "splitlab/accounting/flops.hpp"

#include <numeric>

namespace splitlab::acct {

std::uint64_t flops_forward(const nn::Layer& layer, std::uint64_t batch) {
  switch (layer.spec.kind) {
    case nn::LayerKind::dense: {
      const std::uint64_t in = layer.spec.in_dim;
      const std::uint64_t out = layer.spec.out_dim;
      return 2 * in * out * batch + out * batch;
    }
    case nn::LayerKind::relu: return 1 * layer.output_width * batch;
    case nn::LayerKind::sigmoid: return 4 * layer.output_width * batch;
  }
  return 0;
}

std::uint64_t flops_backward(const nn::Layer& layer, std::uint64_t batch) {
  return 2 * flops_forward(layer, batch);
}

std::uint64_t flops_forward(const nn::SequentialModel& model, std::uint64_t batch) {
  std::uint64_t total = 0;
  for (const auto& l : model.layers()) total += flops_forward(l, batch);
  return total;
}

std::uint64_t flops_backward(const nn::SequentialModel& model, std::uint64_t batch) {
  std::uint64_t total = 0;
  for (const auto& l : model.layers()) total += flops_backward(l, batch);
  return total;
}

std::uint64_t flops_train(const nn::SequentialModel& model, std::uint64_t batch) {
  return flops_forward(model, batch) + flops_backward(model, batch);
}

std::uint64_t flops_average_models(std::uint64_t param_count, std::uint64_t n_models) {
  return (2 * n_models + 1) * param_count;
}

std::uint64_t FlopSnapshot::client_total() const {
  return std::accumulate(per_client.begin(), per_client.end(), std::uint64_t{0},
                         [](std::uint64_t acc, const auto& kv) { return acc + kv.second; });
}

double FlopSnapshot::avg_client() const {
  if (per_client.empty()) return 0.0;
  return static_cast<double>(client_total()) / static_cast<double>(per_client.size());
}

FlopSnapshot operator-(const FlopSnapshot& a, const FlopSnapshot& b) {
  FlopSnapshot d;
  d.server = a.server - b.server;
  d.averaging = a.averaging - b.averaging;
  for (const auto& [id, n] : a.per_client) {
    auto it = b.per_client.find(id);
    d.per_client[id] = n - (it == b.per_client.end() ? 0 : it->second);
  }
  return d;
}

std::uint64_t FlopCounter::client_flops(std::size_t client_id) const {
  auto it = snap_.per_client.find(client_id);
  return it == snap_.per_client.end() ? 0 : it->second;
}

}  // namespace splitlab::acct
