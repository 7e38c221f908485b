#include "splitlab/accounting/ledger.hpp"

namespace splitlab::acct {

TrafficTotals operator-(const TrafficTotals& a, const TrafficTotals& b) {
  TrafficTotals d;
  for (std::size_t i = 0; i < d.by_phase.size(); ++i) d.by_phase[i] = a.by_phase[i] - b.by_phase[i];
  for (std::size_t i = 0; i < d.by_kind.size(); ++i) d.by_kind[i] = a.by_kind[i] - b.by_kind[i];
  d.total = a.total - b.total;
  d.messages = a.messages - b.messages;
  return d;
}

void TrafficLedger::record(Phase phase, Direction direction, PayloadKind kind,
                           std::size_t client_id, std::uint64_t elements) {
  const std::uint64_t bytes = wire_bytes(elements);
  entries_.push_back({phase, direction, kind, client_id, elements, bytes});
  totals_.by_phase[static_cast<std::size_t>(phase)] += bytes;
  totals_.by_kind[static_cast<std::size_t>(kind)] += bytes;
  totals_.total += bytes;
  ++totals_.messages;
}

}  // namespace splitlab::acct
