#include "splitlab/cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "splitlab/errors.hpp"
#include "splitlab/nn/model.hpp"

namespace splitlab::cli {

namespace {

using Keys = std::set<std::string, std::less<>>;

void reject_unknown(const toml::table& table, std::string_view prefix, const Keys& allowed) {
  for (const auto& [key, value] : table) {
    if (!allowed.contains(key.str())) {
      throw ConfigError(std::string(prefix) + std::string(key.str()) + ": unknown field");
    }
  }
}

std::string field(std::string_view prefix, std::string_view key) {
  return std::string(prefix) + std::string(key);
}

template <class T>
std::optional<T> get(const toml::table& t, std::string_view prefix, std::string_view key) {
  const toml::node* node = t.get(key);
  if (!node) return std::nullopt;
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = node->value<double>()) return *v;
    throw ConfigError(field(prefix, key) + ": expected a number");
  } else if constexpr (std::is_same_v<T, bool>) {
    if (auto v = node->value_exact<bool>()) return *v;
    throw ConfigError(field(prefix, key) + ": expected true or false");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (auto v = node->value_exact<std::string>()) return *v;
    throw ConfigError(field(prefix, key) + ": expected a string");
  } else {
    auto v = node->value_exact<std::int64_t>();
    if (!v) throw ConfigError(field(prefix, key) + ": expected an integer");
    if (*v < 0) throw ConfigError(field(prefix, key) + ": must not be negative");
    return static_cast<T>(*v);
  }
}

template <class T>
void read(const toml::table& t, std::string_view prefix, std::string_view key, T& out) {
  if (auto v = get<T>(t, prefix, key)) out = *v;
}

const toml::table* subtable(const toml::table& root, std::string_view name) {
  const toml::node* node = root.get(name);
  if (!node) return nullptr;
  const auto* t = node->as_table();
  if (!t) throw ConfigError(std::string(name) + ": expected a table");
  return t;
}

std::vector<std::size_t> read_dims(const toml::table& t) {
  const toml::node* node = t.get("dims");
  if (!node) throw ConfigError("model.dims: required");
  const auto* arr = node->as_array();
  if (!arr) throw ConfigError("model.dims: expected an array of integers");
  std::vector<std::size_t> dims;
  for (const auto& el : *arr) {
    auto v = el.value_exact<std::int64_t>();
    if (!v || *v < 1) throw ConfigError("model.dims: every entry must be a positive integer");
    dims.push_back(static_cast<std::size_t>(*v));
  }
  if (dims.size() < 2) throw ConfigError("model.dims: need at least an input and an output width");
  if (dims.back() != 1) throw ConfigError("model.dims: the output width must be 1");
  return dims;
}

std::vector<Method> read_methods(const toml::table& root) {
  const toml::node* node = root.get("methods");
  if (!node) return {kAllMethods.begin(), kAllMethods.end()};
  const auto* arr = node->as_array();
  if (!arr) throw ConfigError("methods: expected an array of method ids");
  std::vector<Method> out;
  for (const auto& el : *arr) {
    auto id = el.value_exact<std::string>();
    if (!id) throw ConfigError("methods: expected strings");
    auto m = parse_method(*id);
    if (!m) throw ConfigError("methods: unknown method '" + *id + "'");
    out.push_back(*m);
  }
  if (out.empty()) throw ConfigError("methods: must not be empty");
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (methods.empty()) throw ConfigError("methods: must not be empty");
  if (dims.size() < 2) throw ConfigError("model.dims: need at least an input and an output width");
  const std::size_t layers = 2 * (dims.size() - 1);
  for (Method m : methods) {
    const auto topology = method_topology(m);
    if (!topology) continue;
    const std::string id(method_id(m));
    if (!cut_index) throw ConfigError("model.cut_index: required for split method " + id);
    if (*cut_index < 1 || *cut_index >= layers) {
      throw ConfigError("model.cut_index: must be in [1, " + std::to_string(layers - 1) +
                        "] for a " + std::to_string(layers) + "-layer model");
    }
    if (*topology == Topology::nls) {
      if (!tail_len) throw ConfigError("model.tail_len: required for split method " + id);
      if (*tail_len < 1 || *cut_index + *tail_len >= layers) {
        throw ConfigError("model.tail_len: must be >= 1 and leave the server at least one layer");
      }
    }
  }
  if (train.batch_size == 0) throw ConfigError("training.batch_size: must be >= 1");
  if (train.local_epochs == 0) throw ConfigError("training.local_epochs: must be >= 1");
  if (!(train.optimizer.learning_rate >= 0.0)) {
    throw ConfigError("training.learning_rate: must be >= 0");
  }
  if (!(train.threshold >= 0.0 && train.threshold <= 1.0)) {
    throw ConfigError("training.threshold: must be in [0, 1]");
  }
  if (data.source == DataSource::synthetic) {
    if (data.n_features != dims.front()) {
      throw ConfigError("data.n_features: must equal model.dims[0] (" +
                        std::to_string(dims.front()) + ")");
    }
    if (!(data.class_separation >= 0.0)) throw ConfigError("data.class_separation: must be >= 0");
    if (!(data.per_source_shift >= 0.0)) throw ConfigError("data.per_source_shift: must be >= 0");
  }
  for (auto [name, p] : {std::pair{"partition.train_prevalence", partition.train_prevalence},
                         std::pair{"partition.eval_prevalence", partition.eval_prevalence}}) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError(std::string(name) + ": must be in (0, 1)");
  }
  if (partition.train_total < 5) throw ConfigError("partition.train_total: must be >= 5");
  if (partition.val_per_client == 0) throw ConfigError("partition.val_per_client: must be >= 1");
  if (partition.test_per_client == 0) throw ConfigError("partition.test_per_client: must be >= 1");
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config syntax error at line " << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str());
  }
  reject_unknown(root, "",
                 {"seed", "methods", "checkpoint_dir", "model", "training", "data", "partition"});

  ExperimentConfig cfg;
  read(root, "", "seed", cfg.seed);
  cfg.methods = read_methods(root);
  if (auto dir = get<std::string>(root, "", "checkpoint_dir")) cfg.checkpoint_dir = base_dir / *dir;

  const toml::table* model = subtable(root, "model");
  if (!model) throw ConfigError("model: required");
  reject_unknown(*model, "model.", {"dims", "cut_index", "tail_len"});
  cfg.dims = read_dims(*model);
  cfg.cut_index = get<std::size_t>(*model, "model.", "cut_index");
  cfg.tail_len = get<std::size_t>(*model, "model.", "tail_len");

  if (const toml::table* t = subtable(root, "training")) {
    reject_unknown(*t, "training.",
                   {"epochs", "batch_size", "local_epochs", "optimizer", "learning_rate", "beta1",
                    "beta2", "epsilon", "threshold", "reset_server_optimizer"});
    read(*t, "training.", "epochs", cfg.train.epochs);
    read(*t, "training.", "batch_size", cfg.train.batch_size);
    read(*t, "training.", "local_epochs", cfg.train.local_epochs);
    if (auto kind = get<std::string>(*t, "training.", "optimizer")) {
      if (*kind == "adam") {
        cfg.train.optimizer.kind = nn::OptimizerKind::adam;
      } else if (*kind == "sgd") {
        cfg.train.optimizer.kind = nn::OptimizerKind::sgd;
      } else {
        throw ConfigError("training.optimizer: expected \"adam\" or \"sgd\"");
      }
    }
    read(*t, "training.", "learning_rate", cfg.train.optimizer.learning_rate);
    read(*t, "training.", "beta1", cfg.train.optimizer.beta1);
    read(*t, "training.", "beta2", cfg.train.optimizer.beta2);
    read(*t, "training.", "epsilon", cfg.train.optimizer.epsilon);
    read(*t, "training.", "threshold", cfg.train.threshold);
    read(*t, "training.", "reset_server_optimizer", cfg.train.reset_server_optimizer);
  }

  if (const toml::table* t = subtable(root, "data")) {
    reject_unknown(*t, "data.",
                   {"source", "path", "n_features", "class_separation", "per_source_shift"});
    if (auto source = get<std::string>(*t, "data.", "source")) {
      if (*source == "synthetic") {
        cfg.data.source = DataSource::synthetic;
      } else if (*source == "csv") {
        cfg.data.source = DataSource::csv;
      } else {
        throw ConfigError("data.source: expected \"synthetic\" or \"csv\"");
      }
    }
    if (auto path = get<std::string>(*t, "data.", "path")) cfg.data.csv_path = base_dir / *path;
    if (cfg.data.source == DataSource::csv && cfg.data.csv_path.empty()) {
      throw ConfigError("data.path: required when data.source is \"csv\"");
    }
    cfg.data.n_features = cfg.dims.front();
    read(*t, "data.", "n_features", cfg.data.n_features);
    read(*t, "data.", "class_separation", cfg.data.class_separation);
    read(*t, "data.", "per_source_shift", cfg.data.per_source_shift);
  } else {
    cfg.data.n_features = cfg.dims.front();
  }

  if (const toml::table* t = subtable(root, "partition")) {
    reject_unknown(*t, "partition.",
                   {"train_total", "val_per_client", "test_per_client", "train_prevalence",
                    "eval_prevalence"});
    read(*t, "partition.", "train_total", cfg.partition.train_total);
    read(*t, "partition.", "val_per_client", cfg.partition.val_per_client);
    read(*t, "partition.", "test_per_client", cfg.partition.test_per_client);
    read(*t, "partition.", "train_prevalence", cfg.partition.train_prevalence);
    read(*t, "partition.", "eval_prevalence", cfg.partition.eval_prevalence);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

proto::ExperimentSetup build_setup(const ExperimentConfig& config) {
  config.validate();
  data::PartitionPlan plan = data::reference_plan(config.partition.train_total,
                                               config.partition.val_per_client,
                                               config.partition.test_per_client);
  plan.train_prevalence = config.partition.train_prevalence;
  plan.eval_prevalence = config.partition.eval_prevalence;

  data::Dataset dataset;
  if (config.data.source == DataSource::synthetic) {
    data::SyntheticParams params;
    params.seed = config.seed;
    params.n_features = config.data.n_features;
    params.class_separation = config.data.class_separation;
    params.per_source_shift = config.data.per_source_shift;
    params.sources = plan.required_counts();
    dataset = data::generate_synthetic(params);
  } else {
    dataset = data::load_csv(config.data.csv_path);
    if (dataset.num_features() != config.dims.front()) {
      throw ConfigError("data.path: file has " + std::to_string(dataset.num_features()) +
                        " features but model.dims[0] is " + std::to_string(config.dims.front()));
    }
  }

  proto::ExperimentSetup setup;
  setup.seed = config.seed;
  setup.initial_model = nn::make_mlp(config.dims);
  setup.initial_model.initialize(config.seed);
  for (auto& [id, split] : data::partition(dataset, plan)) {
    setup.clients.push_back({id, std::move(split.train), std::move(split.val),
                             std::move(split.test)});
  }
  setup.train = config.train;
  setup.train.seed = config.seed;
  setup.cut_index = config.cut_index.value_or(0);
  setup.tail_len = config.tail_len.value_or(0);
  return setup;
}

}  // namespace splitlab::cli
