#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "splitlab/method.hpp"
#include "splitlab/nn/model.hpp"

namespace splitlab::acct {

struct ClientSizes {
  std::size_t train = 0;
  std::size_t val = 0;
};

/// Everything the analytic byte count depends on. Batch size does not appear:
/// every metered payload is linear in rows.
struct ClosedFormInput {
  const nn::SequentialModel* model = nullptr;  // unsplit architecture
  std::size_t cut_index = 0;
  std::size_t tail_len = 0;
  std::vector<ClientSizes> clients;
  std::size_t local_epochs = 1;  // E (SFLv3 only)
};

struct EpochBytes {
  std::uint64_t train = 0;
  std::uint64_t eval = 0;
  std::uint64_t model_sync = 0;

  std::uint64_t total() const { return train + eval + model_sync; }
  std::uint64_t headline() const { return train + eval; }
  friend bool operator==(const EpochBytes&, const EpochBytes&) = default;
};

/// Bytes one epoch of `method` must put on the wire under the metering rules.
EpochBytes closed_form_epoch_bytes(Method method, const ClosedFormInput& input);

}  // namespace splitlab::acct
