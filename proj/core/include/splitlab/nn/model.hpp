#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "splitlab/nn/tensor.hpp"

namespace splitlab::nn {

enum class LayerKind { dense, relu, sigmoid };

std::string to_string(LayerKind kind);

struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  std::size_t in_dim = 0;   // dense only
  std::size_t out_dim = 0;  // dense only

  static LayerSpec dense(std::size_t in, std::size_t out) { return {LayerKind::dense, in, out}; }
  static LayerSpec relu() { return {LayerKind::relu, 0, 0}; }
  static LayerSpec sigmoid() { return {LayerKind::sigmoid, 0, 0}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// A layer with its resolved width and parameters. Dense layers carry
/// weights [in_dim, out_dim] and bias [out_dim]; activation layers carry
/// empty tensors.
struct Layer {
  LayerSpec spec;
  std::size_t input_width = 0;
  std::size_t output_width = 0;
  Tensor weights;
  Tensor bias;

  bool has_params() const noexcept { return spec.kind == LayerKind::dense; }
};

/// Ordered stack of dense/relu/sigmoid layers.
///
/// Every parameter mutation made through mutable_parameters() stamps the model
/// with a fresh version number taken from a process-wide counter. Forward
/// caches record that stamp, so backward() can reject a cache produced against
/// different parameters. Copies share the stamp because they share the values.
class SequentialModel {
 public:
  SequentialModel() = default;

  /// Builds zero-initialised parameters. Activation widths are inferred from
  /// the preceding dense layer; a leading activation needs `input_width`.
  explicit SequentialModel(std::vector<LayerSpec> specs, std::size_t input_width = 0);
  /// Adopts already-resolved layers (used when cutting and re-joining models).
  explicit SequentialModel(std::vector<Layer> layers);

  const std::vector<Layer>& layers() const noexcept { return layers_; }
  std::size_t num_layers() const noexcept { return layers_.size(); }
  bool empty() const noexcept { return layers_.empty(); }
  std::size_t input_width() const;
  std::size_t output_width() const;
  std::size_t param_count() const noexcept { return param_count_; }
  std::uint64_t version() const noexcept { return version_; }

  /// Parameter tensors in canonical order: w0, b0, w1, b1, ... over dense layers.
  std::vector<const Tensor*> parameters() const;
  std::vector<Tensor*> mutable_parameters();

  /// Glorot-uniform weights and zero biases from a seeded generator.
  void initialize(std::uint64_t seed);

  /// Layers [begin, end) as an independent model.
  SequentialModel slice(std::size_t begin, std::size_t end) const;
  /// Appends the layers of `next`; widths must line up.
  void append(const SequentialModel& next);

  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);

  /// FNV-1a over the layer structure and the bit patterns of every parameter.
  std::uint64_t checksum() const;
  /// FNV-1a over the layer structure only.
  std::uint64_t architecture_hash() const;

  friend bool operator==(const SequentialModel& a, const SequentialModel& b);

 private:
  void validate_and_count();
  void touch();

  std::vector<Layer> layers_;
  std::size_t param_count_ = 0;
  std::uint64_t version_ = 0;
};

/// dense(d0,d1), relu, dense(d1,d2), relu, ..., dense(dk-1,dk), sigmoid.
SequentialModel make_mlp(std::span<const std::size_t> dims);

}  // namespace splitlab::nn
