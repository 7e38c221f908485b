#include "splitlab/nn/model.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <random>

#include "splitlab/errors.hpp"

namespace splitlab::nn {
namespace {

std::atomic<std::uint64_t> g_version_counter{0};

std::uint64_t next_version() { return ++g_version_counter; }

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_mix(std::uint64_t& h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffU;
    h *= kFnvPrime;
  }
}

void hash_structure(std::uint64_t& h, const std::vector<Layer>& layers) {
  for (const auto& l : layers) {
    fnv_mix(h, static_cast<std::uint64_t>(l.spec.kind));
    fnv_mix(h, l.input_width);
    fnv_mix(h, l.output_width);
  }
}

}  // namespace

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::dense: return "dense";
    case LayerKind::relu: return "relu";
    case LayerKind::sigmoid: return "sigmoid";
  }
  return "unknown";
}

SequentialModel::SequentialModel(std::vector<LayerSpec> specs, std::size_t input_width) {
  std::size_t width = input_width;
  layers_.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const LayerSpec& s = specs[i];
    Layer layer;
    layer.spec = s;
    if (s.kind == LayerKind::dense) {
      if (s.in_dim == 0 || s.out_dim == 0) {
        throw ValidationError("layer " + std::to_string(i) + ": dense dims must be positive");
      }
      layer.input_width = s.in_dim;
      layer.output_width = s.out_dim;
      layer.weights = Tensor({s.in_dim, s.out_dim});
      layer.bias = Tensor({s.out_dim});
    } else {
      if (width == 0) {
        throw ValidationError("layer " + std::to_string(i) +
                              ": activation width unknown (no preceding dense layer)");
      }
      layer.input_width = width;
      layer.output_width = width;
    }
    width = layer.output_width;
    layers_.push_back(std::move(layer));
  }
  validate_and_count();
  touch();
}

SequentialModel::SequentialModel(std::vector<Layer> layers) : layers_(std::move(layers)) {
  validate_and_count();
  touch();
}

void SequentialModel::validate_and_count() {
  param_count_ = 0;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    if (i > 0 && layers_[i - 1].output_width != l.input_width) {
      throw DimensionError("layer " + std::to_string(i) + ": input width " +
                           std::to_string(l.input_width) + " does not match previous output width " +
                           std::to_string(layers_[i - 1].output_width));
    }
    if (l.has_params()) {
      if (l.weights.shape() != std::vector<std::size_t>{l.spec.in_dim, l.spec.out_dim} ||
          l.bias.shape() != std::vector<std::size_t>{l.spec.out_dim}) {
        throw DimensionError("layer " + std::to_string(i) + ": parameter shapes disagree with spec");
      }
      param_count_ += l.weights.size() + l.bias.size();
    } else if (!l.weights.empty() || !l.bias.empty()) {
      throw ValidationError("layer " + std::to_string(i) + ": activation layers carry no parameters");
    }
  }
}

void SequentialModel::touch() { version_ = next_version(); }

std::size_t SequentialModel::input_width() const {
  return layers_.empty() ? 0 : layers_.front().input_width;
}

std::size_t SequentialModel::output_width() const {
  return layers_.empty() ? 0 : layers_.back().output_width;
}

std::vector<const Tensor*> SequentialModel::parameters() const {
  std::vector<const Tensor*> out;
  for (const auto& l : layers_) {
    if (!l.has_params()) continue;
    out.push_back(&l.weights);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<Tensor*> SequentialModel::mutable_parameters() {
  touch();
  std::vector<Tensor*> out;
  for (auto& l : layers_) {
    if (!l.has_params()) continue;
    out.push_back(&l.weights);
    out.push_back(&l.bias);
  }
  return out;
}

void SequentialModel::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& l : layers_) {
    if (!l.has_params()) continue;
    const double fan_in = static_cast<double>(l.spec.in_dim);
    const double fan_out = static_cast<double>(l.spec.out_dim);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : l.weights.data()) w = dist(rng);
    l.bias.fill(0.0);
  }
  touch();
}

SequentialModel SequentialModel::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > layers_.size()) {
    throw ValidationError("slice [" + std::to_string(begin) + ", " + std::to_string(end) +
                          ") outside model of " + std::to_string(layers_.size()) + " layers");
  }
  std::vector<Layer> part(layers_.begin() + static_cast<std::ptrdiff_t>(begin),
                          layers_.begin() + static_cast<std::ptrdiff_t>(end));
  SequentialModel out(std::move(part));
  out.version_ = version_;
  return out;
}

void SequentialModel::append(const SequentialModel& next) {
  layers_.insert(layers_.end(), next.layers_.begin(), next.layers_.end());
  validate_and_count();
  touch();
}

std::vector<double> SequentialModel::flatten() const {
  std::vector<double> out;
  out.reserve(param_count_);
  for (const Tensor* p : parameters()) out.insert(out.end(), p->data().begin(), p->data().end());
  return out;
}

void SequentialModel::assign(std::span<const double> flat) {
  if (flat.size() != param_count_) {
    throw DimensionError("assign: expected " + std::to_string(param_count_) + " values, got " +
                         std::to_string(flat.size()));
  }
  std::size_t offset = 0;
  for (Tensor* p : mutable_parameters()) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), p->size(), p->data().begin());
    offset += p->size();
  }
}

std::uint64_t SequentialModel::checksum() const {
  std::uint64_t h = kFnvOffset;
  hash_structure(h, layers_);
  for (const Tensor* p : parameters()) {
    for (double v : p->data()) fnv_mix(h, std::bit_cast<std::uint64_t>(v));
  }
  return h;
}

std::uint64_t SequentialModel::architecture_hash() const {
  std::uint64_t h = kFnvOffset;
  hash_structure(h, layers_);
  return h;
}

bool operator==(const SequentialModel& a, const SequentialModel& b) {
  if (a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    const Layer& x = a.layers_[i];
    const Layer& y = b.layers_[i];
    if (!(x.spec == y.spec) || x.input_width != y.input_width || x.weights != y.weights ||
        x.bias != y.bias) {
      return false;
    }
  }
  return true;
}

SequentialModel make_mlp(std::span<const std::size_t> dims) {
  if (dims.size() < 2) throw ValidationError("make_mlp: need at least input and output dims");
  std::vector<LayerSpec> specs;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    specs.push_back(LayerSpec::dense(dims[i], dims[i + 1]));
    specs.push_back(i + 2 < dims.size() ? LayerSpec::relu() : LayerSpec::sigmoid());
  }
  return SequentialModel(std::move(specs));
}

}  // namespace splitlab::nn
