#include <benchmark/benchmark.h>

#include "splitlab/data/dataset.hpp"
#include "splitlab/protocols/experiment.hpp"

using namespace splitlab;

namespace {

// The smoke scenario, one epoch per method.
const proto::ExperimentSetup& smoke_setup() {
  static const proto::ExperimentSetup setup = [] {
    data::PartitionPlan plan = data::reference_plan(2000, 115, 115);
    data::SyntheticParams params;
    params.seed = 42;
    params.sources = plan.required_counts();
    proto::ExperimentSetup s;
    s.seed = 42;
    s.initial_model = nn::make_mlp(std::vector<std::size_t>{16, 8, 1});
    s.initial_model.initialize(42);
    for (auto& [id, split] : data::partition(data::generate_synthetic(params), plan)) {
      s.clients.push_back({id, std::move(split.train), std::move(split.val), std::move(split.test)});
    }
    s.train.epochs = 1;
    s.train.batch_size = 32;
    s.train.optimizer.learning_rate = 0.01;
    s.cut_index = 2;
    s.tail_len = 1;
    return s;
  }();
  return setup;
}

void BM_SmokeEpoch(benchmark::State& state) {
  const Method m = kAllMethods[static_cast<std::size_t>(state.range(0))];
  state.SetLabel(std::string(method_id(m)));
  for (auto _ : state) benchmark::DoNotOptimize(proto::run_method(m, smoke_setup()).report.auroc);
}
BENCHMARK(BM_SmokeEpoch)->DenseRange(0, 9)->Unit(benchmark::kMillisecond);

}  // namespace
