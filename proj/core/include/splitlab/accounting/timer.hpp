#pragma once

#include <chrono>
#include <cstddef>
#include <utility>

#include "splitlab/accounting/flops.hpp"
#include "splitlab/accounting/ledger.hpp"

namespace splitlab::acct {

/// Monotonic stopwatch.
class Stopwatch {
 public:
  using clock = std::chrono::steady_clock;

  Stopwatch() : start_(clock::now()) {}
  void restart() { start_ = clock::now(); }
  double seconds() const { return std::chrono::duration<double>(clock::now() - start_).count(); }

 private:
  clock::time_point start_;
};

/// Runs `fn` and returns the elapsed wall-clock seconds.
template <class Fn>
double time_scope(Fn&& fn) {
  Stopwatch sw;
  std::forward<Fn>(fn)();
  return sw.seconds();
}

/// Cost of one epoch (or federated round). `traffic` and `flops` are the
/// increments accrued during that epoch, not running totals.
struct EpochReport {
  std::size_t epoch = 0;  // 1-based
  double wall_clock_seconds = 0.0;
  TrafficTotals traffic;
  FlopSnapshot flops;
  double validation_loss = 0.0;
};

}  // namespace splitlab::acct
