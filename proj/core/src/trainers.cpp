#include "splitlab/protocols/trainers.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "splitlab/errors.hpp"
#include "splitlab/nn/ops.hpp"
#include "splitlab/nn/optimizer.hpp"
#include "splitlab/protocols/fedavg.hpp"
#include "splitlab/protocols/schedule.hpp"
#include "splitlab/protocols/session.hpp"

namespace splitlab::proto {

using acct::Direction;
using acct::PayloadKind;
using acct::Phase;
using nn::Tensor;

namespace {

void require_clients(std::span<const ClientData> clients) {
  if (clients.empty()) throw ValidationError("at least one client is required");
  std::size_t rows = 0;
  for (const auto& c : clients) {
    c.train.validate();
    rows += c.train.size();
  }
  if (rows == 0) throw ValidationError("training data is empty");
}

std::vector<ClientData> sorted_clients(std::span<const ClientData> clients) {
  std::vector<ClientData> out(clients.begin(), clients.end());
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.client_id < b.client_id; });
  return out;
}

data::Dataset pooled(std::span<const ClientData> clients, data::Dataset ClientData::*member) {
  std::vector<data::Dataset> parts;
  parts.reserve(clients.size());
  for (const auto& c : clients) parts.push_back(c.*member);
  return data::Dataset::concat(parts);
}

// Forward pass over a model for validation, returning the BCE sum.
double model_val_sum(const nn::SequentialModel& model, const data::Dataset& val,
                     std::size_t batch_size, double running) {
  for (const auto& b : data::sequential_batches(val, batch_size)) {
    running = nn::bce_sum(nn::predict(model, b.features), b.labels, running);
  }
  return running;
}

/// Shared epoch loop: train, validate, checkpoint and record costs.
TrainOutcome run_epochs(const TrainConfig& cfg, ModelBundle initial,
                        acct::TrafficLedger& ledger, acct::FlopCounter& flops,
                        const std::function<void(std::size_t)>& train_epoch,
                        const std::function<double()>& validate,
                        const std::function<ModelBundle()>& snapshot) {
  TrainOutcome out;
  CheckpointKeeper keeper;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto traffic0 = ledger.snapshot();
    const auto flops0 = flops.snapshot();
    acct::Stopwatch sw;
    train_epoch(epoch);
    const double val_loss = validate();
    const double seconds = sw.seconds();
    keeper.offer(epoch + 1, val_loss, snapshot());
    out.epochs.push_back({epoch + 1, seconds, ledger.snapshot() - traffic0,
                          flops.snapshot() - flops0, val_loss});
  }
  out.last = cfg.epochs == 0 ? initial : snapshot();
  out.checkpoint = keeper.best();
  out.best = out.checkpoint ? out.checkpoint->params : std::move(initial);
  out.stored_loss_history = keeper.history();
  return out;
}

double pooled_val_rows(std::span<const ClientData> clients) {
  std::size_t rows = 0;
  for (const auto& c : clients) rows += c.val.size();
  if (rows == 0) throw ValidationError("validation set is empty");
  return static_cast<double>(rows);
}

}  // namespace

TrainOutcome train_centralized(const nn::SequentialModel& initial,
                               std::span<const ClientData> clients, const TrainConfig& cfg,
                               acct::FlopCounter& flops) {
  cfg.validate();
  require_clients(clients);
  const auto ordered = sorted_clients(clients);
  const data::Dataset train = pooled(ordered, &ClientData::train);
  const data::Dataset val = pooled(ordered, &ClientData::val);
  if (val.size() == 0) throw ValidationError("validation set is empty");

  nn::SequentialModel model = initial;
  nn::Optimizer opt(cfg.optimizer);
  acct::TrafficLedger unused;

  auto train_epoch = [&](std::size_t epoch) {
    for (const auto& b : data::make_batches(train, cfg.batch_size, cfg.seed, epoch, 0)) {
      auto fwd = nn::forward(model, b.features);
      auto loss = nn::bce_loss(fwd.output, b.labels);
      auto grads = nn::backward(model, fwd.cache, loss.grad);
      opt.step(model, grads.param_grads);
      flops.add_server(acct::flops_train(model, b.labels.rows()));
    }
  };
  auto validate = [&] {
    flops.add_server(acct::flops_forward(model, val.size()));
    return model_val_sum(model, val, cfg.batch_size, 0.0) / static_cast<double>(val.size());
  };
  return run_epochs(cfg, initial, unused, flops, train_epoch, validate,
                    [&] { return ModelBundle{model}; });
}

TrainOutcome train_federated(const nn::SequentialModel& initial,
                             std::span<const ClientData> clients, const TrainConfig& cfg,
                             acct::TrafficLedger& ledger, acct::FlopCounter& flops) {
  cfg.validate();
  require_clients(clients);
  const auto ordered = sorted_clients(clients);
  const double val_rows = pooled_val_rows(ordered);
  for (const auto& c : ordered) flops.register_client(c.client_id);

  nn::SequentialModel global = initial;
  const std::size_t params = global.param_count();
  // Each client keeps its optimizer state from round to round.
  std::map<std::size_t, nn::Optimizer> optimizers;
  for (const auto& c : ordered) optimizers.emplace(c.client_id, nn::Optimizer(cfg.optimizer));

  auto train_round = [&](std::size_t round) {
    std::vector<nn::SequentialModel> locals;
    std::vector<std::size_t> counts;
    for (const auto& c : ordered) {
      ledger.record(Phase::train, Direction::server_to_client, PayloadKind::model, c.client_id,
                    params);
      nn::SequentialModel local = global;
      nn::Optimizer& opt = optimizers.at(c.client_id);
      for (const auto& b : data::make_batches(c.train, cfg.batch_size, cfg.seed, round, 0)) {
        auto fwd = nn::forward(local, b.features);
        auto loss = nn::bce_loss(fwd.output, b.labels);
        auto grads = nn::backward(local, fwd.cache, loss.grad);
        opt.step(local, grads.param_grads);
      }
      flops.add_client(c.client_id, acct::flops_train(local, c.train.size()));
      ledger.record(Phase::train, Direction::client_to_server, PayloadKind::model, c.client_id,
                    params);
      locals.push_back(std::move(local));
      counts.push_back(c.train.size());
    }
    global = federated_average(locals, counts);
    flops.add_averaging(acct::flops_average_models(params, locals.size()));
  };
  // Clients score the broadcast model on their own validation rows.
  auto validate = [&] {
    double sum = 0.0;
    for (const auto& c : ordered) {
      flops.add_client(c.client_id, acct::flops_forward(global, c.val.size()));
      sum = model_val_sum(global, c.val, cfg.batch_size, sum);
    }
    return sum / val_rows;
  };
  return run_epochs(cfg, initial, ledger, flops, train_round, validate,
                    [&] { return ModelBundle{global}; });
}

namespace {

TrainOutcome train_sequential_split(const nn::SequentialModel& initial,
                                    std::span<const ClientData> clients,
                                    const split::SplitSpec& spec, Schedule schedule,
                                    const TrainConfig& cfg, bool sync_clients,
                                    acct::TrafficLedger& ledger, acct::FlopCounter& flops) {
  cfg.validate();
  require_clients(clients);
  const auto ordered = sorted_clients(clients);
  pooled_val_rows(ordered);
  for (const auto& c : ordered) flops.register_client(c.client_id);
  SplitSession session = SplitSession::create(initial, ordered, spec, cfg.optimizer);
  const SplitBundle initial_bundle = session.bundle();

  auto train_epoch = [&](std::size_t epoch) {
    std::map<std::size_t, std::vector<data::Batch>> batches;
    std::vector<ClientBatchCount> counts;
    for (const auto& c : ordered) {
      auto& b = batches[c.client_id] =
          data::make_batches(c.train, cfg.batch_size, cfg.seed, epoch, 0);
      counts.push_back({c.client_id, b.size()});
    }
    const auto items = schedule == Schedule::ac ? schedule_ac(counts) : schedule_am(counts);
    run_schedule(session, items, batches, ledger, &flops);
    if (sync_clients) sync_client_segments(session, ledger, &flops);
  };
  auto validate = [&] {
    return validate_split(session, ordered, cfg.batch_size, ledger, &flops);
  };
  return run_epochs(cfg, initial_bundle, ledger, flops, train_epoch, validate,
                    [&] { return ModelBundle{session.bundle()}; });
}

}  // namespace

TrainOutcome train_split(const nn::SequentialModel& initial, std::span<const ClientData> clients,
                         const split::SplitSpec& spec, Schedule schedule, const TrainConfig& cfg,
                         acct::TrafficLedger& ledger, acct::FlopCounter& flops) {
  return train_sequential_split(initial, clients, spec, schedule, cfg, false, ledger, flops);
}

TrainOutcome train_sflv2(const nn::SequentialModel& initial, std::span<const ClientData> clients,
                         const split::SplitSpec& spec, const TrainConfig& cfg,
                         acct::TrafficLedger& ledger, acct::FlopCounter& flops) {
  return train_sequential_split(initial, clients, spec, Schedule::ac, cfg, true, ledger, flops);
}

TrainOutcome train_sflv3(const nn::SequentialModel& initial, std::span<const ClientData> clients,
                         const split::SplitSpec& spec, const TrainConfig& cfg,
                         acct::TrafficLedger& ledger, acct::FlopCounter& flops) {
  cfg.validate();
  require_clients(clients);
  const auto ordered = sorted_clients(clients);
  pooled_val_rows(ordered);
  for (const auto& c : ordered) flops.register_client(c.client_id);
  SplitSession session = SplitSession::create(initial, ordered, spec, cfg.optimizer);
  const SplitBundle initial_bundle = session.bundle();

  RoundPlan plan;
  plan.local_epochs = cfg.local_epochs;
  for (const auto& c : ordered) plan.participants.push_back(c.client_id);

  auto train_round = [&](std::size_t round) {
    std::vector<ActivationPayload> payloads;
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      payloads.push_back(sflv3_client_forward_prop(session.clients[i], ordered[i].train, cfg, round,
                                                   cfg.local_epochs, session.topology, ledger,
                                                   &flops));
    }
    auto grads = sflv3_main_server_train(session.server, session.clients, payloads, plan,
                                         ordered.size(), session.topology,
                                         cfg.reset_server_optimizer, ledger, &flops);
    for (auto& c : session.clients) sflv3_client_backprop(c, grads.at(c.client_id), &flops);
  };
  auto validate = [&] {
    return validate_split(session, ordered, cfg.batch_size, ledger, &flops);
  };
  return run_epochs(cfg, initial_bundle, ledger, flops, train_round, validate,
                    [&] { return ModelBundle{session.bundle()}; });
}

TestMetrics evaluate(const ModelBundle& model, const data::Dataset& test, double threshold) {
  test.validate();
  if (test.size() == 0) throw ValidationError("test set is empty");
  std::map<std::size_t, std::vector<std::size_t>> rows_by_source;
  for (std::size_t r = 0; r < test.size(); ++r) rows_by_source[test.source_ids[r]].push_back(r);

  TestMetrics m;
  m.predictions.threshold = threshold;
  m.predictions.scores.assign(test.size(), 0.0);
  m.predictions.labels.assign(test.labels.data().begin(), test.labels.data().end());
  for (const auto& [source, rows] : rows_by_source) {
    const Tensor pred = predict_for_client(model, source, test.features.gather_rows(rows));
    for (std::size_t k = 0; k < rows.size(); ++k) m.predictions.scores[rows[k]] = pred[k];
  }
  m.auroc = metrics::auroc(m.predictions);
  m.auprc = metrics::auprc(m.predictions);
  const auto fk = metrics::f1_and_kappa(m.predictions);
  m.f1 = fk.f1;
  m.kappa = fk.kappa;
  m.kappa_degenerate = fk.kappa_degenerate;
  return m;
}

data::Dataset pooled_test(std::span<const ClientData> clients) {
  return pooled(sorted_clients(clients), &ClientData::test);
}

}  // namespace splitlab::proto
