#pragma once

#include <cstddef>
#include <cstdint>

#include "splitlab/accounting/flops.hpp"
#include "splitlab/accounting/ledger.hpp"
#include "splitlab/method.hpp"
#include "splitlab/nn/model.hpp"
#include "splitlab/nn/ops.hpp"
#include "splitlab/nn/optimizer.hpp"
#include "splitlab/nn/tensor.hpp"

namespace splitlab::split {

/// Where a model is cut.
///   LS:  client [0, cut_index), server [cut_index, end)
///   NLS: client [0, cut_index) and the last tail_len layers, server the middle
struct SplitSpec {
  Topology topology = Topology::ls;
  std::size_t cut_index = 1;
  std::size_t tail_len = 0;  // NLS only

  /// Throws ValidationError unless the spec fits a model of `num_layers`.
  void validate(std::size_t num_layers) const;
};

/// The three segments of a cut model. `client_tail` is empty under LS.
struct SplitModel {
  Topology topology = Topology::ls;
  nn::SequentialModel client_head;
  nn::SequentialModel server_body;
  nn::SequentialModel client_tail;

  /// head + body + tail in order.
  nn::SequentialModel join() const;
};

SplitModel split_model(nn::SequentialModel model, const SplitSpec& spec);

/// One tensor crossing the cut.
struct CutMessage {
  acct::Direction direction = acct::Direction::client_to_server;
  acct::PayloadKind kind = acct::PayloadKind::activation;
  nn::Tensor tensor;

  std::uint64_t byte_size() const { return acct::wire_bytes(tensor.size()); }
};

/// The metered channel between one client and the server. Every payload that
/// crosses the cut goes through send(); under NLS a labels payload is rejected.
class CutLink {
 public:
  CutLink(Topology topology, acct::Phase phase, acct::TrafficLedger& ledger,
          std::size_t client_id);

  /// Meters the message and hands its tensor to the receiving side.
  nn::Tensor send(CutMessage message);

  std::size_t sent() const noexcept { return sent_; }

 private:
  Topology topology_;
  acct::Phase phase_;
  acct::TrafficLedger* ledger_;
  std::size_t client_id_;
  std::size_t sent_ = 0;
};

/// Ledger, FLOP counter and identity of the client taking part in a batch.
struct BatchContext {
  acct::TrafficLedger& ledger;
  acct::FlopCounter* flops = nullptr;
  std::size_t client_id = 0;
};

/// Optimizers for the segments touched by a training batch. `tail` is unused
/// under LS.
struct SegmentOptimizers {
  nn::Optimizer& head;
  nn::Optimizer& body;
  nn::Optimizer* tail = nullptr;
};

/// Label-sharing step: activation and labels up, cut gradient down. Returns
/// the batch loss (computed on the server).
double ls_train_batch(SplitModel& split, const nn::Tensor& batch, const nn::Tensor& labels,
                      SegmentOptimizers optimizers, const BatchContext& ctx);

/// U-shaped step: labels never leave the client. Returns the batch loss
/// (computed on the client tail).
double nls_train_batch(SplitModel& split, const nn::Tensor& batch, const nn::Tensor& labels,
                       SegmentOptimizers optimizers, const BatchContext& ctx);

/// Forward-only pass metered as eval traffic (LS: 1 payload, NLS: 2).
nn::Tensor eval_forward(const SplitModel& split, const nn::Tensor& batch, const BatchContext& ctx);

/// Training payload count per batch.
inline constexpr std::size_t train_payloads(Topology t) { return t == Topology::ls ? 3 : 4; }
/// Evaluation payload count per batch.
inline constexpr std::size_t eval_payloads(Topology t) { return t == Topology::ls ? 1 : 2; }

}  // namespace splitlab::split
