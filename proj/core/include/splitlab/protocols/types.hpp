#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "splitlab/accounting/timer.hpp"
#include "splitlab/data/dataset.hpp"
#include "splitlab/method.hpp"
#include "splitlab/nn/model.hpp"
#include "splitlab/nn/optimizer.hpp"

namespace splitlab::proto {

/// One virtual client's private data. Client k holds data from source k.
struct ClientData {
  std::size_t client_id = 0;
  data::Dataset train;
  data::Dataset val;
  data::Dataset test;
};

struct TrainConfig {
  std::size_t epochs = 10;       // epochs, or rounds for FL and SFLv3
  std::size_t batch_size = 64;
  std::size_t local_epochs = 1;  // E, SFLv3 client passes per round
  nn::OptimizerConfig optimizer;
  std::uint64_t seed = 0;        // shuffling
  bool reset_server_optimizer = false;  // SFLv3: fresh server state every round
  double threshold = 0.5;

  void validate() const;
};

/// Client-side segments of one client. `tail` is empty under LS.
struct ClientSegments {
  std::size_t client_id = 0;
  nn::SequentialModel head;
  nn::SequentialModel tail;
};

/// Parameters of every party after split training.
struct SplitBundle {
  Topology topology = Topology::ls;
  std::vector<ClientSegments> clients;  // ascending client_id
  nn::SequentialModel server;

  const ClientSegments& client(std::size_t client_id) const;
};

/// A whole model (centralized, FL) or a set of split segments.
using ModelBundle = std::variant<nn::SequentialModel, SplitBundle>;

/// Predictions for rows that belong to `client_id`.
nn::Tensor predict_for_client(const ModelBundle& bundle, std::size_t client_id,
                              const nn::Tensor& features);

struct Checkpoint {
  std::size_t epoch = 0;  // 1-based
  double validation_loss = 0.0;
  ModelBundle params;
};

/// Ordered clients participating in one SFLv3 round.
struct RoundPlan {
  std::vector<std::size_t> participants;
  std::size_t local_epochs = 1;
};

struct TrainOutcome {
  ModelBundle best;                 // least validation loss; initial model if no epochs ran
  ModelBundle last;                 // parameters after the final epoch
  std::optional<Checkpoint> checkpoint;
  std::vector<acct::EpochReport> epochs;
  std::vector<double> stored_loss_history;  // checkpoint loss after each epoch
};

/// Keeps the checkpoint with the least validation loss seen so far.
class CheckpointKeeper {
 public:
  /// Stores `params` when `validation_loss` beats the current best (or none is held).
  /// Returns true when stored.
  bool offer(std::size_t epoch, double validation_loss, const ModelBundle& params);

  const std::optional<Checkpoint>& best() const noexcept { return best_; }
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::optional<Checkpoint> best_;
  std::vector<double> history_;
};

}  // namespace splitlab::proto
