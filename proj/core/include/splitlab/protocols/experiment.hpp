#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "splitlab/accounting/flops.hpp"
#include "splitlab/accounting/ledger.hpp"
#include "splitlab/method.hpp"
#include "splitlab/protocols/trainers.hpp"
#include "splitlab/protocols/types.hpp"
#include "splitlab/split/split.hpp"

namespace splitlab::proto {

/// One results row. Bytes and FLOPs are totals over all epochs.
struct MetricsReport {
  Method method = Method::centralized;
  std::uint64_t seed = 0;
  double auroc = 0.0;
  double auprc = 0.0;
  double f1 = 0.0;
  double kappa = 0.0;
  std::size_t epochs = 0;
  double wall_s_per_epoch = 0.0;
  std::uint64_t bytes_train = 0;
  std::uint64_t bytes_eval = 0;
  std::uint64_t bytes_model_sync = 0;
  std::uint64_t flops_server = 0;
  double flops_avg_client = 0.0;
  std::uint64_t flops_averaging = 0;
  std::size_t best_epoch = 0;  // 0 when no checkpoint was taken
};

struct ExperimentSetup {
  std::uint64_t seed = 0;
  nn::SequentialModel initial_model;
  std::vector<ClientData> clients;
  TrainConfig train;
  std::size_t cut_index = 0;  // required for split methods
  std::size_t tail_len = 0;   // required for NLS methods
};

struct MethodRun {
  MetricsReport report;
  TrainOutcome outcome;
  acct::TrafficLedger ledger;
  acct::FlopCounter flops;
};

split::SplitSpec split_spec_for(Method method, const ExperimentSetup& setup);

/// Trains `method`, evaluates the checkpoint on the pooled test set and fills
/// the report.
MethodRun run_method(Method method, const ExperimentSetup& setup);

}  // namespace splitlab::proto
