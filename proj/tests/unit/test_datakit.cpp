#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "splitlab/data/dataset.hpp"
#include "splitlab/errors.hpp"
#include "splitlab/protocols/trainers.hpp"

using namespace splitlab;

namespace {

std::vector<proto::ClientData> five_clients(double separation, double shift, std::uint64_t seed) {
  data::PartitionPlan plan = data::reference_plan(1000, 100, 100);
  data::SyntheticParams p;
  p.seed = seed;
  p.n_features = 8;
  p.class_separation = separation;
  p.per_source_shift = shift;
  p.sources = plan.required_counts();
  std::vector<proto::ClientData> out;
  for (auto& [id, s] : data::partition(data::generate_synthetic(p), plan)) {
    out.push_back({id, std::move(s.train), std::move(s.val), std::move(s.test)});
  }
  return out;
}

double centralized_test_auroc(const std::vector<proto::ClientData>& clients, std::uint64_t seed) {
  nn::SequentialModel m = nn::make_mlp(std::vector<std::size_t>{8, 8, 1});
  m.initialize(seed);
  proto::TrainConfig cfg;
  cfg.epochs = 10;
  cfg.batch_size = 32;
  cfg.optimizer.learning_rate = 0.01;
  cfg.seed = seed;
  acct::FlopCounter flops;
  auto out = proto::train_centralized(m, clients, cfg, flops);
  return proto::evaluate(out.best, proto::pooled_test(clients)).auroc;
}

}  // namespace

TEST(Synthetic, SameSeedSameData) {
  auto a = data::generate_synthetic(5, 200, 4, 2.0, 1.0);
  auto b = data::generate_synthetic(5, 200, 4, 2.0, 1.0);
  auto c = data::generate_synthetic(6, 200, 4, 2.0, 1.0);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.source_ids, b.source_ids);
  EXPECT_NE(a.features, c.features);
}

TEST(Synthetic, DegenerateParametersRejected) {
  EXPECT_THROW(data::generate_synthetic(1, 0, 4, 2.0, 1.0), ValidationError);
  EXPECT_THROW(data::generate_synthetic(1, 10, 0, 2.0, 1.0), ValidationError);
  EXPECT_THROW(data::generate_synthetic(1, 10, 4, -1.0, 1.0), ValidationError);
  EXPECT_THROW(data::generate_synthetic(1, 10, 4, 2.0, -1.0), ValidationError);
}

TEST(Synthetic, SourcesHaveDistinctMeans) {
  auto d = data::generate_synthetic(3, 5000, 4, 0.0, 2.0, 2);
  std::array<double, 2> mean{};
  std::array<std::size_t, 2> count{};
  for (std::size_t r = 0; r < d.size(); ++r) {
    mean[d.source_ids[r]] += d.features(r, 0);
    ++count[d.source_ids[r]];
  }
  EXPECT_GT(std::fabs(mean[0] / count[0] - mean[1] / count[1]), 0.1);
}

TEST(Synthetic, NoSeparationIsChance) {
  const double auroc = centralized_test_auroc(five_clients(0.0, 0.0, 3), 3);
  EXPECT_NEAR(auroc, 0.5, 0.05);
}

TEST(Synthetic, LargeSeparationIsLearnable) {
  EXPECT_GE(centralized_test_auroc(five_clients(8.0, 1.0, 4), 4), 0.99);
}

TEST(Partition, ReferenceProportionsAtFullScale) {
  EXPECT_EQ(data::reference_train_sizes(8708), (std::vector<std::size_t>{3772, 1150, 1816, 880, 1090}));
  const auto scaled = data::reference_train_sizes(2000);
  EXPECT_EQ(std::accumulate(scaled.begin(), scaled.end(), std::size_t{0}), 2000u);
  EXPECT_EQ(scaled, (std::vector<std::size_t>{866, 264, 417, 202, 251}));
}

TEST(Partition, PrevalenceExactAndDisjoint) {
  data::PartitionPlan plan = data::reference_plan(2000, 115, 115);
  data::SyntheticParams p;
  p.seed = 42;
  p.sources = plan.required_counts();
  // Spare rows so partition has to choose.
  for (auto& s : p.sources) {
    s.positives += 7;
    s.negatives += 3;
  }
  const auto dataset = data::generate_synthetic(p);
  const auto parts = data::partition(dataset, plan);
  ASSERT_EQ(parts.size(), 5u);
  std::set<std::size_t> seen;
  std::size_t total = 0;
  for (const auto& [id, s] : parts) {
    const auto& sizes = plan.clients[id];
    EXPECT_EQ(s.train.size(), sizes.train);
    EXPECT_EQ(s.train.positives(), static_cast<std::size_t>(std::llround(0.5 * sizes.train)));
    EXPECT_EQ(s.val.positives(), static_cast<std::size_t>(std::llround(0.1 * sizes.val)));
    EXPECT_EQ(s.test.positives(), static_cast<std::size_t>(std::llround(0.1 * sizes.test)));
    for (const auto* idx : {&s.train_indices, &s.val_indices, &s.test_indices}) {
      for (std::size_t i : *idx) {
        seen.insert(i);
        ++total;
        EXPECT_EQ(dataset.source_ids[i], id);
      }
    }
  }
  EXPECT_EQ(seen.size(), total);
}

TEST(Partition, TooFewSamplesOfAClass) {
  data::PartitionPlan plan = data::reference_plan(100, 10, 10);
  data::SyntheticParams p;
  p.sources = plan.required_counts();
  p.sources[2].positives -= 1;
  EXPECT_THROW(data::partition(data::generate_synthetic(p), plan), ValidationError);
}

TEST(Batches, SizesAndShortTail) {
  auto d = data::generate_synthetic(1, 10, 3, 1.0, 0.0, 1);
  auto b = data::make_batches(d, 4, 9, 0, 0);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0].indices.size(), 4u);
  EXPECT_EQ(b[1].indices.size(), 4u);
  EXPECT_EQ(b[2].indices.size(), 2u);
}

TEST(Batches, DeterministicPerKey) {
  auto d = data::generate_synthetic(1, 50, 3, 1.0, 0.0, 1);
  auto order = [&](std::uint64_t seed, std::uint64_t epoch, std::uint64_t stream) {
    std::vector<std::size_t> out;
    for (const auto& b : data::make_batches(d, 8, seed, epoch, stream))
      out.insert(out.end(), b.indices.begin(), b.indices.end());
    return out;
  };
  EXPECT_EQ(order(3, 1, 2), order(3, 1, 2));
  EXPECT_NE(order(3, 1, 2), order(3, 2, 2));
  EXPECT_NE(order(3, 1, 2), order(3, 1, 3));
  auto sorted = order(3, 1, 2);
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Csv, RoundTrip) {
  auto d = data::generate_synthetic(2, 30, 4, 2.0, 1.0, 3);
  const auto path = std::filesystem::temp_directory_path() / "splitlab_datakit_roundtrip.csv";
  data::save_csv(d, path);
  auto back = data::load_csv(path);
  EXPECT_EQ(back.features, d.features);
  EXPECT_EQ(back.labels, d.labels);
  EXPECT_EQ(back.source_ids, d.source_ids);
  std::filesystem::remove(path);
}

TEST(Csv, BadLabelRejected) {
  const auto path = std::filesystem::temp_directory_path() / "splitlab_datakit_bad.csv";
  {
    std::ofstream out(path);
    out << "feature_0,label,source_id\n0.5,2,0\n";
  }
  EXPECT_THROW(data::load_csv(path), ValidationError);
  std::filesystem::remove(path);
}
