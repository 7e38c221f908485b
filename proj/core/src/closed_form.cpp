#include "splitlab/accounting/closed_form.hpp"

#include "splitlab/accounting/ledger.hpp"
#include "splitlab/errors.hpp"

namespace splitlab::acct {
namespace {

struct CutWidths {
  std::uint64_t head_out = 0;   // H1: head -> body
  std::uint64_t body_out = 0;   // H2: body -> tail (NLS)
  std::uint64_t labels = 0;     // label columns (LS)
  std::uint64_t client_params = 0;
};

CutWidths widths_for(const ClosedFormInput& in, Topology topology) {
  const auto& layers = in.model->layers();
  const std::size_t n = layers.size();
  if (in.cut_index < 1 || in.cut_index >= n) {
    throw ValidationError("closed form: cut_index out of range");
  }
  CutWidths w;
  w.head_out = layers[in.cut_index - 1].output_width;
  w.labels = in.model->output_width();
  w.client_params = in.model->slice(0, in.cut_index).param_count();
  if (topology == Topology::nls) {
    if (in.tail_len < 1 || in.cut_index + in.tail_len >= n) {
      throw ValidationError("closed form: tail_len out of range");
    }
    w.body_out = layers[n - in.tail_len - 1].output_width;
    w.client_params += in.model->slice(n - in.tail_len, n).param_count();
  }
  return w;
}

}  // namespace

EpochBytes closed_form_epoch_bytes(Method method, const ClosedFormInput& input) {
  if (input.model == nullptr) throw ValidationError("closed form: model is required");
  EpochBytes bytes;
  const std::uint64_t n_clients = input.clients.size();

  if (method == Method::centralized) return bytes;
  if (method == Method::fl) {
    bytes.train = 2 * n_clients * wire_bytes(input.model->param_count());
    return bytes;
  }

  const auto topology = method_topology(method);
  if (!topology) throw ValidationError("closed form: unknown method");
  const CutWidths w = widths_for(input, *topology);
  const bool is_sflv3 = method == Method::sflv3_ls || method == Method::sflv3_nls;
  const std::uint64_t passes = is_sflv3 ? input.local_epochs : 1;

  // Per-row elements of one training step and one evaluation pass.
  const std::uint64_t train_row = *topology == Topology::ls
                                      ? 2 * w.head_out + w.labels
                                      : 2 * w.head_out + 2 * w.body_out;
  const std::uint64_t eval_row =
      *topology == Topology::ls ? w.head_out : w.head_out + w.body_out;

  for (const auto& c : input.clients) {
    bytes.train += wire_bytes(passes * c.train * train_row);
    bytes.eval += wire_bytes(c.val * eval_row);
  }
  if (method == Method::sflv2_ls || method == Method::sflv2_nls) {
    bytes.model_sync = 2 * n_clients * wire_bytes(w.client_params);
  }
  return bytes;
}

}  // namespace splitlab::acct
