#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace splitlab::acct {

/// Bytes per tensor element on the wire. Compute is 64-bit; transfers are
/// metered as 32-bit floats.
inline constexpr std::uint64_t kWireBytesPerElement = 4;

inline constexpr std::uint64_t wire_bytes(std::uint64_t elements) {
  return elements * kWireBytesPerElement;
}

enum class Phase { train, eval, model_sync };
enum class Direction { client_to_server, server_to_client };
enum class PayloadKind { activation, gradient, labels, model };

struct LedgerEntry {
  Phase phase = Phase::train;
  Direction direction = Direction::client_to_server;
  PayloadKind kind = PayloadKind::activation;
  std::size_t client_id = 0;
  std::uint64_t elements = 0;
  std::uint64_t bytes = 0;
};

/// Immutable totals taken from a ledger at a point in time.
struct TrafficTotals {
  std::array<std::uint64_t, 3> by_phase{};  // indexed by Phase
  std::array<std::uint64_t, 4> by_kind{};   // indexed by PayloadKind
  std::uint64_t total = 0;
  std::uint64_t messages = 0;

  std::uint64_t phase(Phase p) const { return by_phase[static_cast<std::size_t>(p)]; }
  std::uint64_t kind(PayloadKind k) const { return by_kind[static_cast<std::size_t>(k)]; }
  /// Train plus eval traffic: the communication reported per method.
  std::uint64_t headline() const { return phase(Phase::train) + phase(Phase::eval); }

  friend TrafficTotals operator-(const TrafficTotals& a, const TrafficTotals& b);
  friend bool operator==(const TrafficTotals&, const TrafficTotals&) = default;
};

/// Append-only record of every payload that crossed the client/server boundary.
class TrafficLedger {
 public:
  void record(Phase phase, Direction direction, PayloadKind kind, std::size_t client_id,
              std::uint64_t elements);

  const std::vector<LedgerEntry>& entries() const noexcept { return entries_; }
  const TrafficTotals& totals() const noexcept { return totals_; }
  TrafficTotals snapshot() const { return totals_; }
  std::uint64_t total_bytes() const noexcept { return totals_.total; }

 private:
  std::vector<LedgerEntry> entries_;
  TrafficTotals totals_;
};

}  // namespace splitlab::acct
