#pragma once

#include <cstddef>
#include <span>

#include "splitlab/nn/model.hpp"

namespace splitlab::proto {

/// Sample-count-weighted parameter mean: each parameter becomes
/// sum_i (m_i / sum m) * param_i. Computed as p_0 + sum_i w_i (p_i - p_0) so
/// identical inputs come back bit-identical. Models must share one architecture.
nn::SequentialModel federated_average(std::span<const nn::SequentialModel> models,
                                      std::span<const std::size_t> sample_counts);

}  // namespace splitlab::proto
