#include "splitlab/protocols/fedavg.hpp"

#include <numeric>

#include "splitlab/errors.hpp"

namespace splitlab::proto {

nn::SequentialModel federated_average(std::span<const nn::SequentialModel> models,
                                      std::span<const std::size_t> sample_counts) {
  if (models.empty()) throw ValidationError("federated_average: no models");
  if (models.size() != sample_counts.size()) {
    throw ValidationError("federated_average: one sample count per model required");
  }
  const auto& reference = models.front();
  for (std::size_t i = 1; i < models.size(); ++i) {
    if (models[i].architecture_hash() != reference.architecture_hash() ||
        models[i].param_count() != reference.param_count()) {
      throw ValidationError("federated_average: model " + std::to_string(i) +
                            " differs structurally from model 0");
    }
  }
  for (std::size_t m : sample_counts) {
    if (m == 0) throw ValidationError("federated_average: sample counts must be positive");
  }
  const double total = static_cast<double>(
      std::accumulate(sample_counts.begin(), sample_counts.end(), std::size_t{0}));

  std::vector<double> avg = reference.flatten();
  const std::vector<double> base = avg;
  for (std::size_t i = 1; i < models.size(); ++i) {
    const double w = static_cast<double>(sample_counts[i]) / total;
    const std::vector<double> p = models[i].flatten();
    for (std::size_t j = 0; j < avg.size(); ++j) avg[j] += w * (p[j] - base[j]);
  }
  nn::SequentialModel out = reference;
  out.assign(avg);
  return out;
}

}  // namespace splitlab::proto
