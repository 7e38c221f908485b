#include "splitlab/split/split.hpp"

#include "splitlab/errors.hpp"

namespace splitlab::split {

using acct::Direction;
using acct::PayloadKind;
using acct::Phase;
using nn::Tensor;

void SplitSpec::validate(std::size_t num_layers) const {
  if (cut_index < 1 || cut_index >= num_layers) {
    throw ValidationError("cut_index " + std::to_string(cut_index) + " outside [1, " +
                          std::to_string(num_layers == 0 ? 0 : num_layers - 1) + "]");
  }
  if (topology == Topology::nls) {
    if (tail_len < 1) throw ValidationError("tail_len must be >= 1 for NLS");
    if (cut_index + tail_len >= num_layers) {
      throw ValidationError("cut_index + tail_len must be < " + std::to_string(num_layers) +
                            " so the server keeps at least one layer");
    }
  }
}

nn::SequentialModel SplitModel::join() const {
  nn::SequentialModel out = client_head;
  out.append(server_body);
  if (!client_tail.empty()) out.append(client_tail);
  return out;
}

SplitModel split_model(nn::SequentialModel model, const SplitSpec& spec) {
  const std::size_t n = model.num_layers();
  spec.validate(n);
  SplitModel s;
  s.topology = spec.topology;
  s.client_head = model.slice(0, spec.cut_index);
  if (spec.topology == Topology::ls) {
    s.server_body = model.slice(spec.cut_index, n);
  } else {
    s.server_body = model.slice(spec.cut_index, n - spec.tail_len);
    s.client_tail = model.slice(n - spec.tail_len, n);
  }
  return s;
}

CutLink::CutLink(Topology topology, Phase phase, acct::TrafficLedger& ledger,
                 std::size_t client_id)
    : topology_(topology), phase_(phase), ledger_(&ledger), client_id_(client_id) {}

Tensor CutLink::send(CutMessage message) {
  if (topology_ == Topology::nls && message.kind == PayloadKind::labels) {
    throw ProtocolError("labels may not cross the cut in the NLS topology");
  }
  ledger_->record(phase_, message.direction, message.kind, client_id_, message.tensor.size());
  ++sent_;
  return std::move(message.tensor);
}

namespace {

void require_batch(const Tensor& batch, const Tensor& labels) {
  if (batch.rank() != 2 || batch.rows() == 0) {
    throw ValidationError("training batch must have at least one row");
  }
  if (labels.rows() != batch.rows()) {
    throw DimensionError("labels rows do not match batch rows");
  }
}

void add_client(const BatchContext& ctx, std::uint64_t n) {
  if (ctx.flops) ctx.flops->add_client(ctx.client_id, n);
}

void add_server(const BatchContext& ctx, std::uint64_t n) {
  if (ctx.flops) ctx.flops->add_server(n);
}

void check_count(const CutLink& link, std::size_t expected) {
  if (link.sent() != expected) {
    throw ProtocolError("expected " + std::to_string(expected) + " payloads, sent " +
                        std::to_string(link.sent()));
  }
}

}  // namespace

double ls_train_batch(SplitModel& split, const Tensor& batch, const Tensor& labels,
                      SegmentOptimizers opt, const BatchContext& ctx) {
  if (split.topology != Topology::ls) throw ProtocolError("ls_train_batch on an NLS split");
  require_batch(batch, labels);
  const std::uint64_t rows = batch.rows();
  CutLink link(Topology::ls, Phase::train, ctx.ledger, ctx.client_id);

  // Client.
  auto head = nn::forward(split.client_head, batch);
  add_client(ctx, acct::flops_forward(split.client_head, rows));
  const Tensor act = link.send({Direction::client_to_server, PayloadKind::activation, head.output});
  const Tensor y = link.send({Direction::client_to_server, PayloadKind::labels, labels});

  // Server.
  auto body = nn::forward(split.server_body, act);
  auto loss = nn::bce_loss(body.output, y);
  auto body_grads = nn::backward(split.server_body, body.cache, loss.grad);
  opt.body.step(split.server_body, body_grads.param_grads);
  add_server(ctx, acct::flops_train(split.server_body, rows));
  const Tensor d_act =
      link.send({Direction::server_to_client, PayloadKind::gradient, body_grads.input_grad});

  // Client.
  auto head_grads = nn::backward(split.client_head, head.cache, d_act);
  opt.head.step(split.client_head, head_grads.param_grads);
  add_client(ctx, acct::flops_backward(split.client_head, rows));

  check_count(link, train_payloads(Topology::ls));
  return loss.loss;
}

double nls_train_batch(SplitModel& split, const Tensor& batch, const Tensor& labels,
                       SegmentOptimizers opt, const BatchContext& ctx) {
  if (split.topology != Topology::nls) throw ProtocolError("nls_train_batch on an LS split");
  if (opt.tail == nullptr) throw ValidationError("nls_train_batch needs a tail optimizer");
  require_batch(batch, labels);
  const std::uint64_t rows = batch.rows();
  CutLink link(Topology::nls, Phase::train, ctx.ledger, ctx.client_id);

  auto head = nn::forward(split.client_head, batch);
  add_client(ctx, acct::flops_forward(split.client_head, rows));
  const Tensor act = link.send({Direction::client_to_server, PayloadKind::activation, head.output});

  auto body = nn::forward(split.server_body, act);
  add_server(ctx, acct::flops_forward(split.server_body, rows));
  const Tensor body_out =
      link.send({Direction::server_to_client, PayloadKind::activation, body.output});

  auto tail = nn::forward(split.client_tail, body_out);
  auto loss = nn::bce_loss(tail.output, labels);
  auto tail_grads = nn::backward(split.client_tail, tail.cache, loss.grad);
  opt.tail->step(split.client_tail, tail_grads.param_grads);
  add_client(ctx, acct::flops_train(split.client_tail, rows));
  const Tensor d_body_out =
      link.send({Direction::client_to_server, PayloadKind::gradient, tail_grads.input_grad});

  auto body_grads = nn::backward(split.server_body, body.cache, d_body_out);
  opt.body.step(split.server_body, body_grads.param_grads);
  add_server(ctx, acct::flops_backward(split.server_body, rows));
  const Tensor d_act =
      link.send({Direction::server_to_client, PayloadKind::gradient, body_grads.input_grad});

  auto head_grads = nn::backward(split.client_head, head.cache, d_act);
  opt.head.step(split.client_head, head_grads.param_grads);
  add_client(ctx, acct::flops_backward(split.client_head, rows));

  check_count(link, train_payloads(Topology::nls));
  return loss.loss;
}

Tensor eval_forward(const SplitModel& split, const Tensor& batch, const BatchContext& ctx) {
  const std::uint64_t rows = batch.rows();
  CutLink link(split.topology, Phase::eval, ctx.ledger, ctx.client_id);

  Tensor act = nn::predict(split.client_head, batch);
  add_client(ctx, acct::flops_forward(split.client_head, rows));
  const Tensor up = link.send({Direction::client_to_server, PayloadKind::activation, act});

  Tensor out = nn::predict(split.server_body, up);
  add_server(ctx, acct::flops_forward(split.server_body, rows));
  if (split.topology == Topology::ls) {
    check_count(link, eval_payloads(Topology::ls));
    return out;
  }
  const Tensor down = link.send({Direction::server_to_client, PayloadKind::activation, out});
  Tensor pred = nn::predict(split.client_tail, down);
  add_client(ctx, acct::flops_forward(split.client_tail, rows));
  check_count(link, eval_payloads(Topology::nls));
  return pred;
}

}  // namespace splitlab::split
