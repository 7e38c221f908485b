#include "splitlab/protocols/types.hpp"

#include "splitlab/errors.hpp"
#include "splitlab/nn/ops.hpp"

namespace splitlab::proto {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ValidationError("training.batch_size must be >= 1");
  if (local_epochs == 0) throw ValidationError("training.local_epochs must be >= 1");
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ValidationError("training.threshold must be in [0,1]");
  }
  optimizer.validate();
}

const ClientSegments& SplitBundle::client(std::size_t client_id) const {
  for (const auto& c : clients) {
    if (c.client_id == client_id) return c;
  }
  throw ValidationError("no client segments for source id " + std::to_string(client_id));
}

nn::Tensor predict_for_client(const ModelBundle& bundle, std::size_t client_id,
                              const nn::Tensor& features) {
  if (const auto* model = std::get_if<nn::SequentialModel>(&bundle)) {
    return nn::predict(*model, features);
  }
  const auto& split = std::get<SplitBundle>(bundle);
  const ClientSegments& c = split.client(client_id);
  nn::Tensor out = nn::predict(c.head, features);
  out = nn::predict(split.server, out);
  if (split.topology == Topology::nls) out = nn::predict(c.tail, out);
  return out;
}

bool CheckpointKeeper::offer(std::size_t epoch, double validation_loss,
                             const ModelBundle& params) {
  const bool better = !best_ || validation_loss < best_->validation_loss;
  if (better) best_ = Checkpoint{epoch, validation_loss, params};
  history_.push_back(best_->validation_loss);
  return better;
}

}  // namespace splitlab::proto
