#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "splitlab/data/dataset.hpp"
#include "splitlab/nn/ops.hpp"
#include "splitlab/nn/optimizer.hpp"
#include "splitlab/protocols/schedule.hpp"
#include "splitlab/protocols/types.hpp"
#include "splitlab/split/split.hpp"

namespace splitlab::proto {

/// Batches of the current SFLv3 round, kept on the client between forward
/// propagation and backpropagation.
struct PendingRound {
  std::vector<nn::ForwardCache> head_caches;
  std::vector<std::size_t> rows;
  nn::Tensor labels;       // kept client-side under NLS
};

/// Client-owned segments and optimizer state. `segments.server_body` is an
/// empty slot that only holds the server segment while a batch is served.
struct ClientState {
  std::size_t client_id = 0;
  std::size_t sample_count = 0;
  split::SplitModel segments;
  nn::Optimizer head_opt;
  nn::Optimizer tail_opt;
  PendingRound pending;
};

/// The single shared server segment.
struct ServerState {
  nn::SequentialModel body;
  nn::Optimizer opt;
  std::size_t round = 0;
};

/// One server and its clients for the split-family protocols.
struct SplitSession {
  Topology topology = Topology::ls;
  std::vector<ClientState> clients;  // ascending client_id
  ServerState server;

  /// Every client receives a copy of the initial head (and tail); the server
  /// receives the body. Optimizers start fresh.
  static SplitSession create(const nn::SequentialModel& initial, std::span<const ClientData> data,
                             const split::SplitSpec& spec, const nn::OptimizerConfig& optimizer);

  /// Throws ProtocolError for an unknown id.
  ClientState& client(std::size_t client_id);

  SplitBundle bundle() const;
};

/// Runs one split training step for `client_id` against the shared server body.
double train_batch(SplitSession& session, std::size_t client_id, const data::Batch& batch,
                   acct::TrafficLedger& ledger, acct::FlopCounter* flops);

/// Executes a schedule over pre-built per-client batches. Returns the summed
/// batch losses.
double run_schedule(SplitSession& session, std::span<const ScheduleItem> schedule,
                    const std::map<std::size_t, std::vector<data::Batch>>& batches,
                    acct::TrafficLedger& ledger, acct::FlopCounter* flops);

/// Pooled validation BCE: every client's validation rows pass through that
/// client's segments; the loss is the sum over all rows divided by the row count.
double validate_split(const SplitSession& session, std::span<const ClientData> data,
                      std::size_t batch_size, acct::TrafficLedger& ledger,
                      acct::FlopCounter* flops);

/// Averages client heads (and tails) weighted by sample count and hands the
/// result back to every client, metering one upload and one download each.
void sync_client_segments(SplitSession& session, acct::TrafficLedger& ledger,
                          acct::FlopCounter* flops);

// SplitFedv3 ----------------------------------------------------------------

/// What a client sends the main server for one round.
struct ActivationPayload {
  std::size_t client_id = 0;
  std::size_t sample_count = 0;
  nn::Tensor activations;  // all batches of all local epochs, row-stacked
  nn::Tensor labels;       // LS only; empty under NLS
};

/// E local epochs over every batch with frozen head parameters. Activations
/// and labels are concatenated in batch order; caches stay on the client.
ActivationPayload sflv3_client_forward_prop(ClientState& client, const data::Dataset& train,
                                            const TrainConfig& cfg, std::size_t round,
                                            std::size_t local_epochs, Topology topology,
                                            acct::TrafficLedger& ledger,
                                            acct::FlopCounter* flops);

/// NLS only: tail forward over the server output, loss with the client's own
/// labels, per-batch tail updates. Returns the gradient w.r.t. the server output.
nn::Tensor sflv3_client_tail_step(ClientState& client, const nn::Tensor& server_output,
                                  acct::FlopCounter* flops);

/// Main-server round: forward and backward every payload against the frozen
/// server segment, return each client's cut gradient, then apply one update
/// with gradient (n_t / n) * sum_i (m_i / sum m) * g_i, reduced in ascending
/// client id.
std::map<std::size_t, nn::Tensor> sflv3_main_server_train(
    ServerState& server, std::span<ClientState> clients,
    std::span<const ActivationPayload> payloads, const RoundPlan& plan,
    std::size_t total_clients, Topology topology, bool reset_optimizer,
    acct::TrafficLedger& ledger, acct::FlopCounter* flops);

/// Slices dA back into the pending batches and applies one head update per
/// batch. Gradients for every slice come from the frozen forward caches.
void sflv3_client_backprop(ClientState& client, const nn::Tensor& d_activations,
                           acct::FlopCounter* flops);

}  // namespace splitlab::proto
