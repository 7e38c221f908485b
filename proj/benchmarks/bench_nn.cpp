#include <benchmark/benchmark.h>

#include "splitlab/nn/model.hpp"
#include "splitlab/nn/ops.hpp"
#include "splitlab/nn/optimizer.hpp"
#include "splitlab/split/split.hpp"

using namespace splitlab;

namespace {

nn::Tensor filled(std::size_t rows, std::size_t cols) {
  nn::Tensor t = nn::Tensor::matrix(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i % 17) / 17.0 - 0.5;
  return t;
}

void BM_Forward(benchmark::State& state) {
  const std::size_t batch = static_cast<std::size_t>(state.range(0));
  nn::SequentialModel m = nn::make_mlp(std::vector<std::size_t>{16, 64, 32, 1});
  m.initialize(1);
  const nn::Tensor x = filled(batch, 16);
  for (auto _ : state) benchmark::DoNotOptimize(nn::predict(m, x));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_Forward)->Arg(32)->Arg(256);

void BM_TrainStep(benchmark::State& state) {
  const std::size_t batch = static_cast<std::size_t>(state.range(0));
  nn::SequentialModel m = nn::make_mlp(std::vector<std::size_t>{16, 64, 32, 1});
  m.initialize(1);
  nn::Optimizer opt(nn::OptimizerConfig{});
  const nn::Tensor x = filled(batch, 16);
  nn::Tensor y = nn::Tensor::matrix(batch, 1);
  for (std::size_t i = 0; i < batch; i += 2) y[i] = 1.0;
  for (auto _ : state) {
    auto f = nn::forward(m, x);
    auto l = nn::bce_loss(f.output, y);
    opt.step(m, nn::backward(m, f.cache, l.grad).param_grads);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_TrainStep)->Arg(32)->Arg(256);

void BM_SplitTrainStep(benchmark::State& state) {
  const auto topology = state.range(0) == 0 ? Topology::ls : Topology::nls;
  nn::SequentialModel m = nn::make_mlp(std::vector<std::size_t>{16, 64, 32, 1});
  m.initialize(1);
  auto s = split::split_model(m, {topology, 2, topology == Topology::ls ? 0u : 2u});
  nn::Optimizer head(nn::OptimizerConfig{}), body(nn::OptimizerConfig{}), tail(nn::OptimizerConfig{});
  const nn::Tensor x = filled(32, 16);
  nn::Tensor y = nn::Tensor::matrix(32, 1);
  for (std::size_t i = 0; i < 32; i += 2) y[i] = 1.0;
  acct::TrafficLedger ledger;
  split::BatchContext ctx{ledger, nullptr, 0};
  split::SegmentOptimizers opt{head, body, &tail};
  for (auto _ : state) {
    if (topology == Topology::ls) {
      benchmark::DoNotOptimize(split::ls_train_batch(s, x, y, opt, ctx));
    } else {
      benchmark::DoNotOptimize(split::nls_train_batch(s, x, y, opt, ctx));
    }
  }
}
BENCHMARK(BM_SplitTrainStep)->Arg(0)->Arg(1);

}  // namespace
