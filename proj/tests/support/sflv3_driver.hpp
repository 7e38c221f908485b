#pragma once

#include <vector>

#include "splitlab/protocols/session.hpp"

namespace oracle {

// Runs SFLv3 rounds by hand with clients visited in `order` at every stage.
// Returns the final server segment parameters.
inline std::vector<double> sflv3_server_after(const splitlab::nn::SequentialModel& model,
                                              const std::vector<splitlab::proto::ClientData>& clients,
                                              const splitlab::split::SplitSpec& spec,
                                              const splitlab::proto::TrainConfig& cfg,
                                              const std::vector<std::size_t>& order,
                                              std::size_t rounds) {
  using namespace splitlab;
  auto s = proto::SplitSession::create(model, clients, spec, cfg.optimizer);
  acct::TrafficLedger ledger;
  for (std::size_t round = 0; round < rounds; ++round) {
    std::vector<proto::ActivationPayload> payloads;
    for (std::size_t id : order) {
      payloads.push_back(proto::sflv3_client_forward_prop(s.client(id), clients.at(id).train, cfg,
                                                          round, cfg.local_epochs, spec.topology,
                                                          ledger, nullptr));
    }
    const proto::RoundPlan plan{order, cfg.local_epochs};
    auto grads = proto::sflv3_main_server_train(s.server, s.clients, payloads, plan,
                                                clients.size(), spec.topology, false, ledger,
                                                nullptr);
    for (std::size_t id : order) proto::sflv3_client_backprop(s.client(id), grads.at(id), nullptr);
  }
  return s.server.body.flatten();
}

}  // namespace oracle
