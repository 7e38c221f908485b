#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace splitlab::proto {

struct ClientBatchCount {
  std::size_t client_id = 0;
  std::size_t batches = 0;
};

struct ScheduleItem {
  std::size_t client_id = 0;
  std::size_t batch_index = 0;

  friend bool operator==(const ScheduleItem&, const ScheduleItem&) = default;
};

/// Alternate-client order: every batch of the lowest id, then the next client.
std::vector<ScheduleItem> schedule_ac(std::span<const ClientBatchCount> clients);

/// Alternate-mini-batch order: one batch per client in ascending id, round
/// robin. A client out of batches sits out for the rest of the epoch.
std::vector<ScheduleItem> schedule_am(std::span<const ClientBatchCount> clients);

}  // namespace splitlab::proto
