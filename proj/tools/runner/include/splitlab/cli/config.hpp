#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "splitlab/data/dataset.hpp"
#include "splitlab/method.hpp"
#include "splitlab/protocols/experiment.hpp"
#include "splitlab/protocols/types.hpp"

namespace splitlab::cli {

/// Invalid experiment configuration. The message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DataSource { synthetic, csv };

struct DataConfig {
  DataSource source = DataSource::synthetic;
  std::filesystem::path csv_path;  // csv only; relative paths resolve against the config file
  std::size_t n_features = 16;
  double class_separation = 4.0;
  double per_source_shift = 1.0;
};

struct PartitionConfig {
  std::size_t train_total = 2000;
  std::size_t val_per_client = 115;
  std::size_t test_per_client = 115;
  double train_prevalence = 0.5;
  double eval_prevalence = 0.1;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::vector<Method> methods;  // defaults to every method
  std::vector<std::size_t> dims;
  std::optional<std::size_t> cut_index;
  std::optional<std::size_t> tail_len;
  proto::TrainConfig train;
  DataConfig data;
  PartitionConfig partition;
  std::optional<std::filesystem::path> checkpoint_dir;

  /// Method-specific checks: split methods need cut_index, NLS methods need
  /// tail_len, and both must fit the model. Throws ConfigError.
  void validate() const;
};

/// Parses TOML text. `base_dir` anchors relative paths. Syntax, key names and
/// value types are checked here; call validate() once overrides are applied.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Generates or loads the data, partitions it and initializes the model.
proto::ExperimentSetup build_setup(const ExperimentConfig& config);

}  // namespace splitlab::cli
