#pragma once

#include <span>

#include "splitlab/accounting/flops.hpp"
#include "splitlab/accounting/ledger.hpp"
#include "splitlab/metrics/metrics.hpp"
#include "splitlab/protocols/types.hpp"
#include "splitlab/split/split.hpp"

namespace splitlab::proto {

/// Ordinary mini-batch training on the pooled data of every client.
TrainOutcome train_centralized(const nn::SequentialModel& initial,
                               std::span<const ClientData> clients, const TrainConfig& cfg,
                               acct::FlopCounter& flops);

/// One federated round per epoch: broadcast, one local epoch per client,
/// upload, weighted average.
TrainOutcome train_federated(const nn::SequentialModel& initial,
                             std::span<const ClientData> clients, const TrainConfig& cfg,
                             acct::TrafficLedger& ledger, acct::FlopCounter& flops);

/// Split learning with one shared server body and unsynchronised client segments.
TrainOutcome train_split(const nn::SequentialModel& initial, std::span<const ClientData> clients,
                         const split::SplitSpec& spec, Schedule schedule, const TrainConfig& cfg,
                         acct::TrafficLedger& ledger, acct::FlopCounter& flops);

/// Split learning (alternate client) plus end-of-epoch averaging of client segments.
TrainOutcome train_sflv2(const nn::SequentialModel& initial, std::span<const ClientData> clients,
                         const split::SplitSpec& spec, const TrainConfig& cfg,
                         acct::TrafficLedger& ledger, acct::FlopCounter& flops);

/// Unique client segments; one aggregated server update per round.
TrainOutcome train_sflv3(const nn::SequentialModel& initial, std::span<const ClientData> clients,
                         const split::SplitSpec& spec, const TrainConfig& cfg,
                         acct::TrafficLedger& ledger, acct::FlopCounter& flops);

struct TestMetrics {
  metrics::ScoredPredictions predictions;
  double auroc = 0.0;
  double auprc = 0.0;
  double f1 = 0.0;
  double kappa = 0.0;
  bool kappa_degenerate = false;
};

/// Routes every test row through the segments of the client owning its
/// source id and scores the pooled predictions.
TestMetrics evaluate(const ModelBundle& model, const data::Dataset& test, double threshold = 0.5);

/// Test rows of every client, concatenated in ascending client id.
data::Dataset pooled_test(std::span<const ClientData> clients);

}  // namespace splitlab::proto
