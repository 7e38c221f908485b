#include "splitlab/protocols/schedule.hpp"

#include <algorithm>

namespace splitlab::proto {
namespace {

std::vector<ClientBatchCount> by_id(std::span<const ClientBatchCount> clients) {
  std::vector<ClientBatchCount> sorted(clients.begin(), clients.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.client_id < b.client_id; });
  return sorted;
}

}  // namespace

std::vector<ScheduleItem> schedule_ac(std::span<const ClientBatchCount> clients) {
  std::vector<ScheduleItem> out;
  for (const auto& c : by_id(clients)) {
    for (std::size_t b = 0; b < c.batches; ++b) out.push_back({c.client_id, b});
  }
  return out;
}

std::vector<ScheduleItem> schedule_am(std::span<const ClientBatchCount> clients) {
  const auto sorted = by_id(clients);
  std::size_t rounds = 0;
  for (const auto& c : sorted) rounds = std::max(rounds, c.batches);
  std::vector<ScheduleItem> out;
  for (std::size_t b = 0; b < rounds; ++b) {
    for (const auto& c : sorted) {
      if (b < c.batches) out.push_back({c.client_id, b});
    }
  }
  return out;
}

}  // namespace splitlab::proto
