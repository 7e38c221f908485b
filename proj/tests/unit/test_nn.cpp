#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "splitlab/errors.hpp"
#include "splitlab/nn/model.hpp"
#include "splitlab/nn/ops.hpp"
#include "splitlab/nn/optimizer.hpp"

using namespace splitlab;
using nn::LayerSpec;
using nn::SequentialModel;
using nn::Tensor;

namespace {

SequentialModel seeded_mlp(std::vector<std::size_t> dims, std::uint64_t seed) {
  SequentialModel m = nn::make_mlp(dims);
  m.initialize(seed);
  return m;
}

}  // namespace

TEST(Tensor, ShapeMustMatchData) {
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), DimensionError);
  Tensor t({2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(t(1, 2), 6.0);
}

TEST(Tensor, SliceGatherAndStack) {
  Tensor t = Tensor::from_rows({{1, 2}, {3, 4}, {5, 6}});
  EXPECT_EQ(t.slice_rows(1, 2), Tensor::from_rows({{3, 4}, {5, 6}}));
  const std::vector<std::size_t> idx{2, 0};
  EXPECT_EQ(t.gather_rows(idx), Tensor::from_rows({{5, 6}, {1, 2}}));
  const std::vector<Tensor> parts{t.slice_rows(0, 1), t.slice_rows(1, 2)};
  EXPECT_EQ(Tensor::vstack(parts), t);
}

TEST(Model, ParamCountAndWidths) {
  SequentialModel m = nn::make_mlp(std::vector<std::size_t>{16, 8, 1});
  EXPECT_EQ(m.num_layers(), 4u);
  EXPECT_EQ(m.param_count(), 16u * 8 + 8 + 8 + 1);
  EXPECT_EQ(m.input_width(), 16u);
  EXPECT_EQ(m.output_width(), 1u);
  EXPECT_THROW(SequentialModel({LayerSpec::dense(3, 4), LayerSpec::dense(5, 1)}), DimensionError);
}

TEST(Model, InitializationIsSeededAndBounded) {
  SequentialModel a = seeded_mlp({6, 4, 1}, 7);
  SequentialModel b = seeded_mlp({6, 4, 1}, 7);
  SequentialModel c = seeded_mlp({6, 4, 1}, 8);
  EXPECT_EQ(a.checksum(), b.checksum());
  EXPECT_NE(a.checksum(), c.checksum());
  const double limit = std::sqrt(6.0 / (6 + 4));
  for (double w : a.layers()[0].weights.data()) EXPECT_LE(std::fabs(w), limit);
  for (double v : a.layers()[0].bias.data()) EXPECT_EQ(v, 0.0);
}

TEST(Model, FlattenAssignRoundTrip) {
  SequentialModel a = seeded_mlp({5, 3, 1}, 1);
  SequentialModel b = seeded_mlp({5, 3, 1}, 2);
  b.assign(a.flatten());
  EXPECT_EQ(a.checksum(), b.checksum());
}

TEST(Forward, ZeroWeightsGiveZeros) {
  SequentialModel m({LayerSpec::dense(3, 2)});
  auto r = nn::forward(m, oracle::random_matrix(4, 3, 1));
  for (double v : r.output.data()) EXPECT_EQ(v, 0.0);
}

TEST(Forward, HandSum) {
  SequentialModel m({LayerSpec::dense(2, 1)});
  m.mutable_parameters()[0]->fill(1.0);
  auto r = nn::forward(m, Tensor::from_rows({{3, 4}}));
  EXPECT_EQ(r.output(0, 0), 7.0);
}

TEST(Forward, MatchesHandRolledOracle) {
  SequentialModel m = seeded_mlp({7, 5, 4, 1}, 99);
  // Non-zero biases so the bias path is exercised too.
  for (Tensor* p : m.mutable_parameters()) {
    if (p->rank() == 1) {
      for (std::size_t i = 0; i < p->size(); ++i) (*p)[i] = 0.1 * static_cast<double>(i + 1);
    }
  }
  const Tensor x = oracle::random_matrix(9, 7, 5);
  const auto got = nn::forward(m, x).output;
  const auto want = oracle::forward(m, oracle::to_matrix(x));
  for (std::size_t r = 0; r < 9; ++r) EXPECT_NEAR(got(r, 0), want[r][0], 1e-12);
}

TEST(Forward, WrongWidthNamesTheLayer) {
  SequentialModel m = seeded_mlp({4, 3, 1}, 1);
  try {
    nn::forward(m, oracle::random_matrix(2, 5, 1));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("layer 0"), std::string::npos);
  }
}

TEST(Forward, DoesNotTouchParameters) {
  SequentialModel m = seeded_mlp({4, 3, 1}, 3);
  const auto before = m.checksum();
  nn::forward(m, oracle::random_matrix(5, 4, 2));
  EXPECT_EQ(before, m.checksum());
}

TEST(Loss, AnalyticValues) {
  EXPECT_NEAR(nn::bce_loss(Tensor::from_rows({{0.5}}), Tensor::from_rows({{1}})).loss,
              std::log(2.0), 1e-12);
  EXPECT_NEAR(nn::bce_loss(Tensor::from_rows({{0.999999999999}}), Tensor::from_rows({{1}})).loss,
              0.0, 1e-9);
  const double expected = (-std::log(0.9) - std::log(0.8)) / 2.0;
  EXPECT_NEAR(nn::bce_loss(Tensor::from_rows({{0.9}, {0.2}}), Tensor::from_rows({{1}, {0}})).loss,
              expected, 1e-12);
  EXPECT_NEAR(expected, 0.164252, 1e-6);
}

TEST(Loss, RejectsNonBinaryLabels) {
  EXPECT_THROW(nn::bce_loss(Tensor::from_rows({{0.5}}), Tensor::from_rows({{0.5}})),
               ValidationError);
}

TEST(Loss, NeverNegativeAndClampedAtExtremes) {
  const auto r = nn::bce_loss(Tensor::from_rows({{0.0}, {1.0}}), Tensor::from_rows({{1}, {0}}));
  EXPECT_TRUE(std::isfinite(r.loss));
  EXPECT_GT(r.loss, 0.0);
  const auto zero = nn::bce_loss(Tensor::from_rows({{1.0}, {0.0}}), Tensor::from_rows({{1}, {0}}));
  EXPECT_GE(zero.loss, 0.0);
  EXPECT_LT(zero.loss, 1e-11);
}

TEST(Loss, GradientMatchesFiniteDifference) {
  const Tensor p = Tensor::from_rows({{0.3}, {0.8}, {0.55}});
  const Tensor y = Tensor::from_rows({{1}, {0}, {1}});
  const auto analytic = nn::bce_loss(p, y).grad;
  std::vector<double> flat(p.data().begin(), p.data().end());
  auto numeric = oracle::numeric_gradient(flat, [&](const std::vector<double>& q) {
    return nn::bce_loss(Tensor({3, 1}, q), y).loss;
  });
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(analytic[i], numeric[i], 1e-8);
}

TEST(Loss, BatchedSumsAgreeWithWholeSum) {
  const Tensor p = Tensor::from_rows({{0.3}, {0.8}, {0.55}, {0.1}});
  const Tensor y = Tensor::from_rows({{1}, {0}, {1}, {0}});
  double running = nn::bce_sum(p.slice_rows(0, 2), y.slice_rows(0, 2));
  running = nn::bce_sum(p.slice_rows(2, 2), y.slice_rows(2, 2), running);
  EXPECT_EQ(running, nn::bce_sum(p, y));
}

TEST(Backward, ZeroOutputGradGivesZeroGrads) {
  SequentialModel m = seeded_mlp({4, 3, 1}, 1);
  auto f = nn::forward(m, oracle::random_matrix(3, 4, 1));
  auto b = nn::backward(m, f.cache, Tensor::matrix(3, 1));
  for (const auto& g : b.param_grads)
    for (double v : g.data()) EXPECT_EQ(v, 0.0);
  for (double v : b.input_grad.data()) EXPECT_EQ(v, 0.0);
}

TEST(Backward, ChainRuleByHand) {
  SequentialModel m({LayerSpec::dense(1, 1)});
  m.mutable_parameters()[0]->fill(2.0);
  auto f = nn::forward(m, Tensor::from_rows({{3}}));
  auto b = nn::backward(m, f.cache, Tensor::from_rows({{1}}));
  EXPECT_EQ(b.param_grads[0][0], 3.0);
  EXPECT_EQ(b.param_grads[1][0], 1.0);
  EXPECT_EQ(b.input_grad[0], 2.0);
}

TEST(Backward, StaleCacheIsAProtocolError) {
  SequentialModel m = seeded_mlp({4, 3, 1}, 1);
  auto f = nn::forward(m, oracle::random_matrix(3, 4, 1));
  (*m.mutable_parameters()[0])[0] += 1.0;
  EXPECT_THROW(nn::backward(m, f.cache, Tensor::matrix(3, 1)), ProtocolError);
}

class GradientCheck : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(GradientCheck, ParametersAndInputMatchCentralDifferences) {
  const std::uint64_t seed = GetParam();
  SequentialModel m = seeded_mlp({6, 5, 4, 1}, seed);
  // Random biases keep every ReLU input away from the kink at exactly zero.
  {
    auto flat = m.flatten();
    const Tensor noise = oracle::random_matrix(1, flat.size(), seed + 3);
    for (std::size_t i = 0; i < flat.size(); ++i) flat[i] += 0.1 * noise[i];
    m.assign(flat);
  }
  ASSERT_LE(m.param_count(), 1000u);
  const Tensor x = oracle::random_matrix(7, 6, seed + 1);
  const Tensor y = oracle::random_labels(7, seed + 2);

  auto fwd = nn::forward(m, x);
  auto loss = nn::bce_loss(fwd.output, y);
  auto bwd = nn::backward(m, fwd.cache, loss.grad);
  std::vector<double> analytic;
  for (const auto& g : bwd.param_grads) analytic.insert(analytic.end(), g.data().begin(), g.data().end());

  const auto numeric = oracle::numeric_gradient(m.flatten(), [&](const std::vector<double>& p) {
    SequentialModel probe = m;
    probe.assign(p);
    return oracle::bce(oracle::forward(probe, oracle::to_matrix(x)), oracle::to_matrix(y));
  });
  ASSERT_EQ(analytic.size(), numeric.size());
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric[i]), 1e-4});
    EXPECT_LT(std::fabs(analytic[i] - numeric[i]) / denom, 1e-6) << "parameter " << i;
  }

  std::vector<double> xin(x.data().begin(), x.data().end());
  const auto numeric_x = oracle::numeric_gradient(xin, [&](const std::vector<double>& v) {
    return oracle::bce(oracle::forward(m, oracle::to_matrix(Tensor({7, 6}, v))),
                       oracle::to_matrix(y));
  });
  for (std::size_t i = 0; i < xin.size(); ++i) {
    const double denom = std::max({std::fabs(bwd.input_grad[i]), std::fabs(numeric_x[i]), 1e-4});
    EXPECT_LT(std::fabs(bwd.input_grad[i] - numeric_x[i]) / denom, 1e-6) << "input " << i;
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, GradientCheck, ::testing::Values(1u, 2u, 3u, 17u, 123u));

TEST(Adam, DefaultsAreStandard) {
  nn::OptimizerConfig c;
  EXPECT_EQ(c.learning_rate, 1e-4);
  EXPECT_EQ(c.beta1, 0.9);
  EXPECT_EQ(c.beta2, 0.999);
  EXPECT_EQ(c.epsilon, 1e-8);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  Tensor p({3}, std::vector<double>{1, -2, 3});
  Tensor* ptrs[] = {&p};
  Tensor g({3}, 0.0);
  nn::AdamState s;
  nn::adam_step(ptrs, std::span<const Tensor>(&g, 1), s, {});
  EXPECT_EQ(p, Tensor({3}, std::vector<double>{1, -2, 3}));
  EXPECT_EQ(s.step_count, 1u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Tensor p({1}, 0.0);
  Tensor* ptrs[] = {&p};
  Tensor g({1}, 1.0);
  nn::AdamState s;
  nn::adam_step(ptrs, std::span<const Tensor>(&g, 1), s, {});
  EXPECT_NEAR(p[0], -1e-4, 1e-11);
}

TEST(Adam, MatchesScalarOracle) {
  nn::OptimizerConfig cfg;
  cfg.learning_rate = 0.01;
  Tensor p({1}, 0.5);
  Tensor* ptrs[] = {&p};
  nn::AdamState s;
  oracle::ScalarAdam ref{0.01};
  double q = 0.5;
  for (double grad : {0.3, 0.3, -1.2, 0.7}) {
    Tensor g({1}, grad);
    nn::adam_step(ptrs, std::span<const Tensor>(&g, 1), s, cfg);
    q = ref.step(q, grad);
    EXPECT_NEAR(p[0], q, 1e-12);
  }
  EXPECT_EQ(s.step_count, 4u);
}

TEST(Adam, ShapeMismatchIsValidationError) {
  Tensor p({2}, 0.0);
  Tensor* ptrs[] = {&p};
  Tensor g({3}, 0.0);
  nn::AdamState s;
  EXPECT_THROW(nn::adam_step(ptrs, std::span<const Tensor>(&g, 1), s, {}), ValidationError);
}

TEST(Training, RepeatedRunsAreBitIdentical) {
  auto run = [] {
    SequentialModel m = seeded_mlp({5, 4, 1}, 11);
    nn::OptimizerConfig cfg;
    cfg.learning_rate = 0.05;
    nn::Optimizer opt(cfg);
    const Tensor x = oracle::random_matrix(12, 5, 3);
    const Tensor y = oracle::random_labels(12, 4);
    for (int i = 0; i < 20; ++i) {
      auto f = nn::forward(m, x);
      auto l = nn::bce_loss(f.output, y);
      opt.step(m, nn::backward(m, f.cache, l.grad).param_grads);
    }
    return m.checksum();
  };
  EXPECT_EQ(run(), run());
}
