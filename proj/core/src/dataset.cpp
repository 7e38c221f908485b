#include "splitlab/data/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "splitlab/errors.hpp"

namespace splitlab::data {

using nn::Tensor;

std::size_t Dataset::positives() const {
  return static_cast<std::size_t>(
      std::count(labels.data().begin(), labels.data().end(), 1.0));
}

double Dataset::prevalence() const {
  if (size() == 0) return 0.0;
  return static_cast<double>(positives()) / static_cast<double>(size());
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.features = features.gather_rows(indices);
  out.labels = labels.gather_rows(indices);
  out.source_ids.reserve(indices.size());
  for (std::size_t i : indices) out.source_ids.push_back(source_ids.at(i));
  return out;
}

Dataset Dataset::concat(std::span<const Dataset> parts) {
  std::vector<Tensor> xs;
  std::vector<Tensor> ys;
  Dataset out;
  for (const auto& p : parts) {
    xs.push_back(p.features);
    ys.push_back(p.labels);
    out.source_ids.insert(out.source_ids.end(), p.source_ids.begin(), p.source_ids.end());
  }
  out.features = Tensor::vstack(xs);
  out.labels = Tensor::vstack(ys);
  return out;
}

void Dataset::validate() const {
  if (features.rank() != 2 || labels.rank() != 2 || labels.cols() != 1) {
    throw ValidationError("dataset: features must be [N,F] and labels [N,1]");
  }
  if (features.rows() != labels.rows() || source_ids.size() != labels.rows()) {
    throw ValidationError("dataset: row counts of features, labels and sources differ");
  }
  for (double y : labels.data()) {
    if (y != 0.0 && y != 1.0) throw ValidationError("dataset: label not in {0,1}");
  }
  if (!features.all_finite()) throw ValidationError("dataset: non-finite feature value");
}

Dataset generate_synthetic(const SyntheticParams& p) {
  if (p.n_features == 0) throw ValidationError("synthetic: n_features must be >= 1");
  if (!(p.class_separation >= 0.0) || !std::isfinite(p.class_separation)) {
    throw ValidationError("synthetic: class_separation must be finite and >= 0");
  }
  if (!(p.per_source_shift >= 0.0) || !std::isfinite(p.per_source_shift)) {
    throw ValidationError("synthetic: per_source_shift must be finite and >= 0");
  }
  std::size_t total = 0;
  for (const auto& s : p.sources) total += s.positives + s.negatives;
  if (total == 0) throw ValidationError("synthetic: n_samples must be >= 1");

  const std::size_t f = p.n_features;
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double axis = 1.0 / std::sqrt(static_cast<double>(f));
  std::vector<std::vector<double>> shifts(p.sources.size(), std::vector<double>(f));
  for (auto& shift : shifts) {
    for (double& v : shift) v = p.per_source_shift * normal(rng);
  }

  Dataset out;
  out.features = Tensor::matrix(total, f);
  out.labels = Tensor::matrix(total, 1);
  out.source_ids.reserve(total);
  std::size_t row = 0;
  for (std::size_t s = 0; s < p.sources.size(); ++s) {
    std::vector<double> labels(p.sources[s].positives, 1.0);
    labels.resize(p.sources[s].positives + p.sources[s].negatives, 0.0);
    std::shuffle(labels.begin(), labels.end(), rng);
    for (double y : labels) {
      const double centre = (y == 1.0 ? 0.5 : -0.5) * p.class_separation * axis;
      for (std::size_t j = 0; j < f; ++j) {
        out.features(row, j) = centre + shifts[s][j] + normal(rng);
      }
      out.labels[row] = y;
      out.source_ids.push_back(s);
      ++row;
    }
  }
  return out;
}

Dataset generate_synthetic(std::uint64_t seed, std::size_t n_samples, std::size_t n_features,
                           double class_separation, double per_source_shift,
                           std::size_t n_sources) {
  if (n_sources == 0) throw ValidationError("synthetic: n_sources must be >= 1");
  if (n_samples == 0) throw ValidationError("synthetic: n_samples must be >= 1");
  SyntheticParams p;
  p.seed = seed;
  p.n_features = n_features;
  p.class_separation = class_separation;
  p.per_source_shift = per_source_shift;
  p.sources.resize(n_sources);
  for (std::size_t i = 0; i < n_samples; ++i) {
    auto& s = p.sources[i % n_sources];
    // Alternate labels within each source: positive first.
    if (s.positives <= s.negatives) {
      ++s.positives;
    } else {
      ++s.negatives;
    }
  }
  return generate_synthetic(p);
}

void PartitionPlan::validate() const {
  if (clients.empty()) throw ValidationError("partition plan: no clients");
  if (!(train_prevalence > 0.0 && train_prevalence < 1.0)) {
    throw ValidationError("partition plan: train_prevalence must be in (0,1)");
  }
  if (!(eval_prevalence > 0.0 && eval_prevalence < 1.0)) {
    throw ValidationError("partition plan: eval_prevalence must be in (0,1)");
  }
  for (std::size_t k = 0; k < clients.size(); ++k) {
    const auto& c = clients[k];
    if (c.train == 0 || c.val == 0 || c.test == 0) {
      throw ValidationError("partition plan: client " + std::to_string(k) +
                            " has an empty split");
    }
  }
}

std::size_t PartitionPlan::positives_for(std::size_t size, double prevalence) {
  return static_cast<std::size_t>(std::llround(prevalence * static_cast<double>(size)));
}

std::vector<SourceCounts> PartitionPlan::required_counts() const {
  std::vector<SourceCounts> out;
  for (const auto& c : clients) {
    const std::size_t tp = positives_for(c.train, train_prevalence);
    const std::size_t vp = positives_for(c.val, eval_prevalence);
    const std::size_t sp = positives_for(c.test, eval_prevalence);
    out.push_back({tp + vp + sp, (c.train - tp) + (c.val - vp) + (c.test - sp)});
  }
  return out;
}

std::vector<std::size_t> reference_train_sizes(std::size_t total_train) {
  static constexpr std::array<std::size_t, 5> kReferenceSizes = {3772, 1150, 1816, 880, 1090};
  const std::size_t reference_total = std::accumulate(kReferenceSizes.begin(), kReferenceSizes.end(), std::size_t{0});
  std::vector<std::size_t> sizes(kReferenceSizes.size());
  std::vector<std::pair<std::size_t, std::size_t>> remainders;  // (remainder numerator, index)
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < kReferenceSizes.size(); ++k) {
    const std::size_t num = kReferenceSizes[k] * total_train;
    sizes[k] = num / reference_total;
    remainders.emplace_back(num % reference_total, k);
    assigned += sizes[k];
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < total_train; ++i, ++assigned) ++sizes[remainders[i].second];
  return sizes;
}

PartitionPlan reference_plan(std::size_t total_train, std::size_t val_per_client,
                             std::size_t test_per_client) {
  PartitionPlan plan;
  for (std::size_t size : reference_train_sizes(total_train)) {
    plan.clients.push_back({size, val_per_client, test_per_client});
  }
  return plan;
}

std::map<std::size_t, ClientSplit> partition(const Dataset& dataset, const PartitionPlan& plan) {
  plan.validate();
  dataset.validate();
  std::map<std::size_t, ClientSplit> out;
  for (std::size_t k = 0; k < plan.clients.size(); ++k) {
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (dataset.source_ids[i] != k) continue;
      (dataset.labels[i] == 1.0 ? pos : neg).push_back(i);
    }
    const auto& sizes = plan.clients[k];
    const std::array<std::size_t, 3> split_sizes = {sizes.train, sizes.val, sizes.test};
    const std::array<double, 3> prevalences = {plan.train_prevalence, plan.eval_prevalence,
                                               plan.eval_prevalence};
    std::size_t pos_used = 0;
    std::size_t neg_used = 0;
    std::array<std::vector<std::size_t>, 3> picks;
    for (std::size_t s = 0; s < 3; ++s) {
      const std::size_t np = PartitionPlan::positives_for(split_sizes[s], prevalences[s]);
      const std::size_t nn_ = split_sizes[s] - np;
      if (pos_used + np > pos.size() || neg_used + nn_ > neg.size()) {
        throw ValidationError("partition: source " + std::to_string(k) +
                              " has too few samples of a class (needs " +
                              std::to_string(pos_used + np) + " positives / " +
                              std::to_string(neg_used + nn_) + " negatives, has " +
                              std::to_string(pos.size()) + " / " + std::to_string(neg.size()) +
                              ")");
      }
      picks[s].insert(picks[s].end(), pos.begin() + static_cast<std::ptrdiff_t>(pos_used),
                      pos.begin() + static_cast<std::ptrdiff_t>(pos_used + np));
      picks[s].insert(picks[s].end(), neg.begin() + static_cast<std::ptrdiff_t>(neg_used),
                      neg.begin() + static_cast<std::ptrdiff_t>(neg_used + nn_));
      std::sort(picks[s].begin(), picks[s].end());
      pos_used += np;
      neg_used += nn_;
    }
    ClientSplit cs;
    cs.train_indices = std::move(picks[0]);
    cs.val_indices = std::move(picks[1]);
    cs.test_indices = std::move(picks[2]);
    cs.train = dataset.subset(cs.train_indices);
    cs.val = dataset.subset(cs.val_indices);
    cs.test = dataset.subset(cs.test_indices);
    out.emplace(k, std::move(cs));
  }
  return out;
}

namespace {

Batch take(const Dataset& dataset, std::vector<std::size_t> indices) {
  Batch b;
  b.features = dataset.features.gather_rows(indices);
  b.labels = dataset.labels.gather_rows(indices);
  b.indices = std::move(indices);
  return b;
}

std::vector<Batch> chunk(const Dataset& dataset, const std::vector<std::size_t>& order,
                         std::size_t batch_size) {
  if (batch_size == 0) throw ValidationError("batch_size must be >= 1");
  std::vector<Batch> out;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    out.push_back(take(dataset, {order.begin() + static_cast<std::ptrdiff_t>(start),
                                 order.begin() + static_cast<std::ptrdiff_t>(end)}));
  }
  return out;
}

}  // namespace

std::vector<Batch> make_batches(const Dataset& dataset, std::size_t batch_size,
                                std::uint64_t seed, std::uint64_t epoch, std::uint64_t stream) {
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::mt19937_64 rng(seq);
  std::shuffle(order.begin(), order.end(), rng);
  return chunk(dataset, order, batch_size);
}

std::vector<Batch> sequential_batches(const Dataset& dataset, std::size_t batch_size) {
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  return chunk(dataset, order, batch_size);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& text, std::size_t line_no, std::size_t col) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("csv line " + std::to_string(line_no) + ", column " +
                          std::to_string(col) + ": not a number: '" + text + "'");
  }
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open csv " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("csv " + path.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_line(line);
  if (header.size() < 3 || header[header.size() - 2] != "label" || header.back() != "source_id") {
    throw ValidationError("csv header must be feature_0,...,feature_{F-1},label,source_id");
  }
  const std::size_t f = header.size() - 2;
  for (std::size_t j = 0; j < f; ++j) {
    if (header[j] != "feature_" + std::to_string(j)) {
      throw ValidationError("csv header column " + std::to_string(j) + " must be feature_" +
                            std::to_string(j));
    }
  }
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<std::size_t> sources;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw ValidationError("csv line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " columns, got " +
                            std::to_string(cells.size()));
    }
    for (std::size_t j = 0; j < f; ++j) xs.push_back(parse_double(cells[j], line_no, j));
    const double y = parse_double(cells[f], line_no, f);
    if (y != 0.0 && y != 1.0) {
      throw ValidationError("csv line " + std::to_string(line_no) + ": label must be 0 or 1");
    }
    ys.push_back(y);
    const double src = parse_double(cells[f + 1], line_no, f + 1);
    if (src < 0 || src != std::floor(src)) {
      throw ValidationError("csv line " + std::to_string(line_no) +
                            ": source_id must be a non-negative integer");
    }
    sources.push_back(static_cast<std::size_t>(src));
  }
  if (ys.empty()) throw ValidationError("csv " + path.string() + " has no rows");
  const std::size_t n = ys.size();
  Dataset d;
  d.features = Tensor({n, f}, std::move(xs));
  d.labels = Tensor({n, 1}, std::move(ys));
  d.source_ids = std::move(sources);
  d.validate();
  return d;
}

void save_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write csv " + path.string());
  const std::size_t f = dataset.num_features();
  for (std::size_t j = 0; j < f; ++j) out << "feature_" << j << ',';
  out << "label,source_id\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (std::size_t j = 0; j < f; ++j) out << dataset.features(i, j) << ',';
    out << static_cast<int>(dataset.labels[i]) << ',' << dataset.source_ids[i] << '\n';
  }
}

}  // namespace splitlab::data
