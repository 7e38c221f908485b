#pragma once

#include <cstddef>
#include <cstdint>
#include <map>

#include "splitlab/nn/model.hpp"

namespace splitlab::acct {

/// Forward cost of one layer on `batch` rows:
///   dense   2*in*out*batch + out*batch
///   relu    1*width*batch
///   sigmoid 4*width*batch
std::uint64_t flops_forward(const nn::Layer& layer, std::uint64_t batch);

/// Backward is counted as twice the forward cost (standard approximation).
std::uint64_t flops_backward(const nn::Layer& layer, std::uint64_t batch);

std::uint64_t flops_forward(const nn::SequentialModel& model, std::uint64_t batch);
std::uint64_t flops_backward(const nn::SequentialModel& model, std::uint64_t batch);
/// Forward plus backward.
std::uint64_t flops_train(const nn::SequentialModel& model, std::uint64_t batch);

/// n multiply-adds per parameter plus one division: (2n + 1) * param_count.
std::uint64_t flops_average_models(std::uint64_t param_count, std::uint64_t n_models);

struct FlopSnapshot {
  std::uint64_t server = 0;
  std::map<std::size_t, std::uint64_t> per_client;
  std::uint64_t averaging = 0;

  std::uint64_t client_total() const;
  /// Mean over registered clients; 0 when there are none.
  double avg_client() const;

  friend FlopSnapshot operator-(const FlopSnapshot& a, const FlopSnapshot& b);
  friend bool operator==(const FlopSnapshot&, const FlopSnapshot&) = default;
};

/// Analytic floating-point operation tallies by party.
class FlopCounter {
 public:
  void register_client(std::size_t client_id) { snap_.per_client.try_emplace(client_id, 0); }
  void add_server(std::uint64_t n) { snap_.server += n; }
  void add_client(std::size_t client_id, std::uint64_t n) { snap_.per_client[client_id] += n; }
  void add_averaging(std::uint64_t n) { snap_.averaging += n; }

  std::uint64_t server_flops() const noexcept { return snap_.server; }
  std::uint64_t client_flops(std::size_t client_id) const;
  std::uint64_t averaging_flops() const noexcept { return snap_.averaging; }
  const FlopSnapshot& snapshot() const noexcept { return snap_; }

 private:
  FlopSnapshot snap_;
};

}  // namespace splitlab::acct
