#include "splitlab/protocols/session.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "splitlab/errors.hpp"
#include "splitlab/protocols/fedavg.hpp"

namespace splitlab::proto {

using acct::Direction;
using acct::PayloadKind;
using acct::Phase;
using nn::Tensor;

SplitSession SplitSession::create(const nn::SequentialModel& initial,
                                  std::span<const ClientData> data, const split::SplitSpec& spec,
                                  const nn::OptimizerConfig& optimizer) {
  split::SplitModel cut = split::split_model(initial, spec);
  SplitSession s;
  s.topology = spec.topology;
  s.server.body = std::move(cut.server_body);
  s.server.opt = nn::Optimizer(optimizer);
  for (const auto& d : data) {
    ClientState c;
    c.client_id = d.client_id;
    c.sample_count = d.train.size();
    c.segments.topology = spec.topology;
    c.segments.client_head = cut.client_head;
    c.segments.client_tail = cut.client_tail;
    c.head_opt = nn::Optimizer(optimizer);
    c.tail_opt = nn::Optimizer(optimizer);
    s.clients.push_back(std::move(c));
  }
  std::sort(s.clients.begin(), s.clients.end(),
            [](const auto& a, const auto& b) { return a.client_id < b.client_id; });
  for (std::size_t i = 1; i < s.clients.size(); ++i) {
    if (s.clients[i].client_id == s.clients[i - 1].client_id) {
      throw ValidationError("duplicate client id " + std::to_string(s.clients[i].client_id));
    }
  }
  return s;
}

ClientState& SplitSession::client(std::size_t client_id) {
  for (auto& c : clients) {
    if (c.client_id == client_id) return c;
  }
  throw ProtocolError("unknown client " + std::to_string(client_id));
}

SplitBundle SplitSession::bundle() const {
  SplitBundle b;
  b.topology = topology;
  b.server = server.body;
  for (const auto& c : clients) {
    b.clients.push_back({c.client_id, c.segments.client_head, c.segments.client_tail});
  }
  return b;
}

namespace {

/// Lends the server body to a client's SplitModel for the duration of a scope.
class ServedBy {
 public:
  ServedBy(ClientState& client, ServerState& server) : client_(client), server_(server) {
    std::swap(client_.segments.server_body, server_.body);
  }
  ~ServedBy() { std::swap(client_.segments.server_body, server_.body); }
  ServedBy(const ServedBy&) = delete;
  ServedBy& operator=(const ServedBy&) = delete;

 private:
  ClientState& client_;
  ServerState& server_;
};

}  // namespace

double train_batch(SplitSession& session, std::size_t client_id, const data::Batch& batch,
                   acct::TrafficLedger& ledger, acct::FlopCounter* flops) {
  ClientState& c = session.client(client_id);
  ServedBy served(c, session.server);
  split::BatchContext ctx{ledger, flops, client_id};
  split::SegmentOptimizers opt{c.head_opt, session.server.opt, &c.tail_opt};
  if (session.topology == Topology::ls) {
    return split::ls_train_batch(c.segments, batch.features, batch.labels, opt, ctx);
  }
  return split::nls_train_batch(c.segments, batch.features, batch.labels, opt, ctx);
}

double run_schedule(SplitSession& session, std::span<const ScheduleItem> schedule,
                    const std::map<std::size_t, std::vector<data::Batch>>& batches,
                    acct::TrafficLedger& ledger, acct::FlopCounter* flops) {
  double loss = 0.0;
  for (const auto& item : schedule) {
    auto it = batches.find(item.client_id);
    if (it == batches.end()) {
      throw ProtocolError("schedule references unknown client " + std::to_string(item.client_id));
    }
    if (item.batch_index >= it->second.size()) {
      throw ProtocolError("schedule references batch " + std::to_string(item.batch_index) +
                          " of client " + std::to_string(item.client_id) + " which has only " +
                          std::to_string(it->second.size()));
    }
    loss += train_batch(session, item.client_id, it->second[item.batch_index], ledger, flops);
  }
  return loss;
}

double validate_split(const SplitSession& session, std::span<const ClientData> data,
                      std::size_t batch_size, acct::TrafficLedger& ledger,
                      acct::FlopCounter* flops) {
  double sum = 0.0;
  std::size_t rows = 0;
  for (const auto& c : session.clients) {
    auto d = std::find_if(data.begin(), data.end(),
                          [&](const ClientData& x) { return x.client_id == c.client_id; });
    if (d == data.end()) throw ProtocolError("no data for client " + std::to_string(c.client_id));
    split::SplitModel view;
    view.topology = session.topology;
    view.client_head = c.segments.client_head;
    view.server_body = session.server.body;
    view.client_tail = c.segments.client_tail;
    split::BatchContext ctx{ledger, flops, c.client_id};
    for (const auto& b : data::sequential_batches(d->val, batch_size)) {
      const Tensor pred = split::eval_forward(view, b.features, ctx);
      sum = nn::bce_sum(pred, b.labels, sum);
      rows += b.labels.rows();
    }
  }
  if (rows == 0) throw ValidationError("validation set is empty");
  return sum / static_cast<double>(rows);
}

void sync_client_segments(SplitSession& session, acct::TrafficLedger& ledger,
                          acct::FlopCounter* flops) {
  const std::size_t n = session.clients.size();
  if (n == 0) return;
  std::vector<nn::SequentialModel> heads;
  std::vector<nn::SequentialModel> tails;
  std::vector<std::size_t> weights;
  for (const auto& c : session.clients) {
    heads.push_back(c.segments.client_head);
    tails.push_back(c.segments.client_tail);
    weights.push_back(c.sample_count);
  }
  const std::size_t client_params = heads.front().param_count() + tails.front().param_count();
  for (const auto& c : session.clients) {
    ledger.record(Phase::model_sync, Direction::client_to_server, PayloadKind::model, c.client_id,
                  client_params);
  }

  nn::SequentialModel head = federated_average(heads, weights);
  nn::SequentialModel tail = session.topology == Topology::nls
                                 ? federated_average(tails, weights)
                                 : nn::SequentialModel{};
  if (flops) {
    flops->add_averaging(acct::flops_average_models(head.param_count(), n));
    if (session.topology == Topology::nls) {
      flops->add_averaging(acct::flops_average_models(tail.param_count(), n));
    }
  }
  for (auto& c : session.clients) {
    ledger.record(Phase::model_sync, Direction::server_to_client, PayloadKind::model, c.client_id,
                  client_params);
    c.segments.client_head = head;
    c.segments.client_tail = tail;
  }
}

ActivationPayload sflv3_client_forward_prop(ClientState& client, const data::Dataset& train,
                                            const TrainConfig& cfg, std::size_t round,
                                            std::size_t local_epochs, Topology topology,
                                            acct::TrafficLedger& ledger,
                                            acct::FlopCounter* flops) {
  if (local_epochs < 1) throw ValidationError("local_epochs (E) must be >= 1");
  client.pending = {};
  std::vector<Tensor> acts;
  std::vector<Tensor> labels;
  std::uint64_t rows = 0;
  for (std::size_t e = 0; e < local_epochs; ++e) {
    const std::uint64_t shuffle_epoch = round * local_epochs + e;
    for (auto& b : data::make_batches(train, cfg.batch_size, cfg.seed, shuffle_epoch, 0)) {
      auto fwd = nn::forward(client.segments.client_head, b.features);
      acts.push_back(std::move(fwd.output));
      client.pending.head_caches.push_back(std::move(fwd.cache));
      client.pending.rows.push_back(b.labels.rows());
      rows += b.labels.rows();
      labels.push_back(std::move(b.labels));
    }
  }
  if (flops) flops->add_client(client.client_id, acct::flops_forward(client.segments.client_head, rows));

  split::CutLink link(topology, Phase::train, ledger, client.client_id);
  ActivationPayload payload;
  payload.client_id = client.client_id;
  payload.sample_count = client.sample_count;
  payload.activations = link.send(
      {Direction::client_to_server, PayloadKind::activation, Tensor::vstack(acts)});
  if (topology == Topology::ls) {
    payload.labels =
        link.send({Direction::client_to_server, PayloadKind::labels, Tensor::vstack(labels)});
  } else {
    client.pending.labels = Tensor::vstack(labels);
  }
  return payload;
}

namespace {

// Splits `grad` into the pending row blocks, backpropagates each against its
// frozen cache, then applies one optimizer step per block in order.
void per_batch_updates(nn::SequentialModel& model, nn::Optimizer& opt,
                       const std::vector<nn::ForwardCache>& caches,
                       const std::vector<std::size_t>& rows, const Tensor& grad,
                       std::vector<Tensor>* input_grads) {
  std::vector<nn::Gradients> grads;
  grads.reserve(caches.size());
  std::size_t offset = 0;
  for (std::size_t k = 0; k < caches.size(); ++k) {
    auto bwd = nn::backward(model, caches[k], grad.slice_rows(offset, rows[k]));
    grads.push_back(std::move(bwd.param_grads));
    if (input_grads) input_grads->push_back(std::move(bwd.input_grad));
    offset += rows[k];
  }
  for (const auto& g : grads) opt.step(model, g);
}

std::size_t total_rows(const std::vector<std::size_t>& rows) {
  std::size_t n = 0;
  for (std::size_t r : rows) n += r;
  return n;
}

}  // namespace

Tensor sflv3_client_tail_step(ClientState& client, const Tensor& server_output,
                              acct::FlopCounter* flops) {
  const auto& rows = client.pending.rows;
  if (server_output.rows() != total_rows(rows)) {
    throw ProtocolError("server output rows do not match the client's pending batches");
  }
  nn::SequentialModel& tail = client.segments.client_tail;
  std::vector<nn::ForwardCache> caches;
  std::vector<Tensor> outputs;
  std::size_t offset = 0;
  for (std::size_t r : rows) {
    auto fwd = nn::forward(tail, server_output.slice_rows(offset, r));
    outputs.push_back(std::move(fwd.output));
    caches.push_back(std::move(fwd.cache));
    offset += r;
  }
  const auto loss = nn::bce_loss(Tensor::vstack(outputs), client.pending.labels);
  std::vector<Tensor> input_grads;
  per_batch_updates(tail, client.tail_opt, caches, rows, loss.grad, &input_grads);
  if (flops) flops->add_client(client.client_id, acct::flops_train(tail, server_output.rows()));
  return Tensor::vstack(input_grads);
}

std::map<std::size_t, Tensor> sflv3_main_server_train(
    ServerState& server, std::span<ClientState> clients,
    std::span<const ActivationPayload> payloads, const RoundPlan& plan,
    std::size_t total_clients, Topology topology, bool reset_optimizer,
    acct::TrafficLedger& ledger, acct::FlopCounter* flops) {
  if (plan.participants.empty()) throw ValidationError("round has no participants");
  if (total_clients < plan.participants.size()) {
    throw ValidationError("more participants than clients");
  }
  const std::set<std::size_t> allowed(plan.participants.begin(), plan.participants.end());
  std::set<std::size_t> seen;
  for (const auto& p : payloads) {
    if (!allowed.contains(p.client_id)) {
      throw ProtocolError("payload from non-participating client " + std::to_string(p.client_id));
    }
    if (!seen.insert(p.client_id).second) {
      throw ProtocolError("duplicate payload from client " + std::to_string(p.client_id));
    }
  }

  struct Contribution {
    std::size_t sample_count = 0;
    nn::Gradients grads;
  };
  std::map<std::size_t, Contribution> contributions;  // ascending client id
  std::map<std::size_t, Tensor> d_activations;

  for (const auto& p : payloads) {
    const std::uint64_t rows = p.activations.rows();
    split::CutLink link(topology, Phase::train, ledger, p.client_id);
    auto fwd = nn::forward(server.body, p.activations);
    Tensor out_grad;
    if (topology == Topology::ls) {
      auto loss = nn::bce_loss(fwd.output, p.labels);
      out_grad = std::move(loss.grad);
    } else {
      auto it = std::find_if(clients.begin(), clients.end(),
                             [&](const ClientState& c) { return c.client_id == p.client_id; });
      if (it == clients.end()) throw ProtocolError("no client state for " + std::to_string(p.client_id));
      const Tensor down =
          link.send({Direction::server_to_client, PayloadKind::activation, fwd.output});
      Tensor d_down = sflv3_client_tail_step(*it, down, flops);
      out_grad = link.send({Direction::client_to_server, PayloadKind::gradient, std::move(d_down)});
    }
    auto bwd = nn::backward(server.body, fwd.cache, out_grad);
    if (flops) flops->add_server(acct::flops_train(server.body, rows));
    d_activations[p.client_id] =
        link.send({Direction::server_to_client, PayloadKind::gradient, std::move(bwd.input_grad)});
    contributions[p.client_id] = {p.sample_count, std::move(bwd.param_grads)};
  }

  if (contributions.empty()) return d_activations;
  double total_samples = 0.0;
  for (const auto& [id, c] : contributions) total_samples += static_cast<double>(c.sample_count);
  if (!(total_samples > 0.0)) throw ValidationError("participating clients report no samples");
  const double participation =
      static_cast<double>(plan.participants.size()) / static_cast<double>(total_clients);

  nn::Gradients aggregate = nn::zero_gradients(server.body);
  for (const auto& [id, c] : contributions) {
    const double w = static_cast<double>(c.sample_count) / total_samples;
    for (std::size_t t = 0; t < aggregate.size(); ++t) {
      auto dst = aggregate[t].data();
      auto src = c.grads[t].data();
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += w * src[j];
    }
  }
  for (auto& g : aggregate) {
    for (double& v : g.data()) v *= participation;
  }
  if (flops) {
    flops->add_averaging(acct::flops_average_models(server.body.param_count(), contributions.size()));
  }
  if (reset_optimizer) server.opt.reset();
  server.opt.step(server.body, aggregate);
  ++server.round;
  return d_activations;
}

void sflv3_client_backprop(ClientState& client, const Tensor& d_activations,
                           acct::FlopCounter* flops) {
  const auto& rows = client.pending.rows;
  if (d_activations.rows() != total_rows(rows)) {
    throw ProtocolError("dA has " + std::to_string(d_activations.rows()) + " rows, expected " +
                        std::to_string(total_rows(rows)));
  }
  per_batch_updates(client.segments.client_head, client.head_opt, client.pending.head_caches, rows,
                    d_activations, nullptr);
  if (flops) {
    flops->add_client(client.client_id,
                      acct::flops_backward(client.segments.client_head, d_activations.rows()));
  }
  client.pending = {};
}

}  // namespace splitlab::proto
