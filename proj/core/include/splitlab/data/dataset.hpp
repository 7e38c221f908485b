#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "splitlab/nn/tensor.hpp"

namespace splitlab::data {

/// Features [N, F], labels [N, 1] in {0,1}, and the data source of each row.
struct Dataset {
  nn::Tensor features;
  nn::Tensor labels;
  std::vector<std::size_t> source_ids;

  std::size_t size() const noexcept { return labels.rows(); }
  std::size_t num_features() const noexcept { return features.cols(); }
  std::size_t positives() const;
  double prevalence() const;

  Dataset subset(std::span<const std::size_t> indices) const;
  /// Row-wise concatenation in argument order.
  static Dataset concat(std::span<const Dataset> parts);

  /// Throws ValidationError on shape disagreement or labels outside {0,1}.
  void validate() const;
};

/// Class counts to draw for one data source.
struct SourceCounts {
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

struct SyntheticParams {
  std::uint64_t seed = 0;
  std::size_t n_features = 16;
  double class_separation = 4.0;  // distance between class means
  double per_source_shift = 1.0;  // scale of each source's mean offset
  std::vector<SourceCounts> sources;
};

/// Two-class Gaussian mixture with unit variance. Class means sit at
/// +/- separation/2 along a fixed unit direction; every source adds its own
/// seeded mean offset (shared by both classes) so sources are non-IID.
/// Rows are grouped by source, classes interleaved in a seeded order.
Dataset generate_synthetic(const SyntheticParams& params);

/// Convenience form: `n_samples` spread round-robin over `n_sources` sources
/// with alternating labels.
Dataset generate_synthetic(std::uint64_t seed, std::size_t n_samples, std::size_t n_features,
                           double class_separation, double per_source_shift,
                           std::size_t n_sources = 5);

struct ClientSplitSizes {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

/// Per-client split sizes and class prevalences. Client k draws only from
/// data source k.
struct PartitionPlan {
  std::vector<ClientSplitSizes> clients;
  double train_prevalence = 0.5;
  double eval_prevalence = 0.1;  // validation and test

  void validate() const;

  /// Positive count for a split of `size` rows at `prevalence` (nearest integer).
  static std::size_t positives_for(std::size_t size, double prevalence);

  /// Class counts per source that partition() will consume.
  std::vector<SourceCounts> required_counts() const;
};

/// Train sizes in the proportions 3772:1150:1816:880:1090, scaled to
/// `total_train` by largest remainder so they sum exactly.
std::vector<std::size_t> reference_train_sizes(std::size_t total_train);

/// Default five-client plan: reference train proportions and equal val/test sizes.
PartitionPlan reference_plan(std::size_t total_train, std::size_t val_per_client,
                             std::size_t test_per_client);

struct ClientSplit {
  Dataset train;
  Dataset val;
  Dataset test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> val_indices;
  std::vector<std::size_t> test_indices;
};

/// Disjoint per-client train/val/test splits meeting the plan's prevalences.
std::map<std::size_t, ClientSplit> partition(const Dataset& dataset, const PartitionPlan& plan);

struct Batch {
  std::vector<std::size_t> indices;  // rows of the source dataset
  nn::Tensor features;
  nn::Tensor labels;
};

/// Seeded shuffle keyed on (seed, epoch, stream) followed by consecutive
/// chunks of `batch_size`. The final short batch is kept.
std::vector<Batch> make_batches(const Dataset& dataset, std::size_t batch_size,
                                std::uint64_t seed, std::uint64_t epoch, std::uint64_t stream);

/// Unshuffled consecutive chunks, used for evaluation passes.
std::vector<Batch> sequential_batches(const Dataset& dataset, std::size_t batch_size);

/// CSV schema: feature_0,...,feature_{F-1},label,source_id
Dataset load_csv(const std::filesystem::path& path);
void save_csv(const Dataset& dataset, const std::filesystem::path& path);

}  // namespace splitlab::data
