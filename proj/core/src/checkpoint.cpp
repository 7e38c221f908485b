#include "splitlab/protocols/checkpoint.hpp"

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "splitlab/errors.hpp"

namespace splitlab::proto {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "splitlab-checkpoint/1";

json layers_to_json(const nn::SequentialModel& model) {
  json layers = json::array();
  for (const auto& l : model.layers()) {
    json j;
    j["kind"] = nn::to_string(l.spec.kind);
    j["input_width"] = l.input_width;
    j["output_width"] = l.output_width;
    if (l.has_params()) {
      j["weights"] = std::vector<double>(l.weights.data().begin(), l.weights.data().end());
      j["bias"] = std::vector<double>(l.bias.data().begin(), l.bias.data().end());
    }
    layers.push_back(std::move(j));
  }
  return layers;
}

nn::SequentialModel layers_from_json(const json& layers) {
  if (!layers.is_array()) throw ValidationError("checkpoint: layers must be an array");
  std::vector<nn::Layer> out;
  for (const auto& j : layers) {
    nn::Layer l;
    const auto kind = j.at("kind").get<std::string>();
    l.input_width = j.at("input_width").get<std::size_t>();
    l.output_width = j.at("output_width").get<std::size_t>();
    if (kind == "dense") {
      l.spec = nn::LayerSpec::dense(l.input_width, l.output_width);
      l.weights = nn::Tensor({l.input_width, l.output_width},
                             j.at("weights").get<std::vector<double>>());
      l.bias = nn::Tensor({l.output_width}, j.at("bias").get<std::vector<double>>());
    } else if (kind == "relu") {
      l.spec = nn::LayerSpec::relu();
    } else if (kind == "sigmoid") {
      l.spec = nn::LayerSpec::sigmoid();
    } else {
      throw ValidationError("checkpoint: unknown layer kind '" + kind + "'");
    }
    out.push_back(std::move(l));
  }
  return nn::SequentialModel(std::move(out));
}

std::uint64_t bundle_hash(const ModelBundle& bundle) {
  if (const auto* m = std::get_if<nn::SequentialModel>(&bundle)) return m->architecture_hash();
  const auto& s = std::get<SplitBundle>(bundle);
  if (s.clients.empty()) return s.server.architecture_hash();
  const auto& c = s.clients.front();
  nn::SequentialModel joined = c.head;
  joined.append(s.server);
  if (!c.tail.empty()) joined.append(c.tail);
  return joined.architecture_hash();
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  json j;
  j["format"] = kFormat;
  j["architecture_hash"] = std::to_string(bundle_hash(checkpoint.params));
  j["epoch"] = checkpoint.epoch;
  j["validation_loss"] = checkpoint.validation_loss;
  json segments = json::array();
  if (const auto* m = std::get_if<nn::SequentialModel>(&checkpoint.params)) {
    j["topology"] = "none";
    segments.push_back({{"role", "model"}, {"layers", layers_to_json(*m)}});
  } else {
    const auto& s = std::get<SplitBundle>(checkpoint.params);
    j["topology"] = std::string(topology_id(s.topology));
    segments.push_back({{"role", "server"}, {"layers", layers_to_json(s.server)}});
    for (const auto& c : s.clients) {
      segments.push_back({{"role", "head"}, {"client_id", c.client_id},
                          {"layers", layers_to_json(c.head)}});
      if (s.topology == Topology::nls) {
        segments.push_back({{"role", "tail"}, {"client_id", c.client_id},
                            {"layers", layers_to_json(c.tail)}});
      }
    }
  }
  j["segments"] = std::move(segments);

  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  // nlohmann prints doubles with max_digits10, which round-trips exactly.
  out << j.dump(1) << '\n';
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  Checkpoint cp;
  try {
    const json j = json::parse(in);
    if (j.at("format").get<std::string>() != kFormat) {
      throw ValidationError("checkpoint: unsupported format");
    }
    cp.epoch = j.at("epoch").get<std::size_t>();
    cp.validation_loss = j.at("validation_loss").get<double>();
    const auto topology = j.at("topology").get<std::string>();
    const auto& segments = j.at("segments");
    if (topology == "none") {
      if (segments.size() != 1) throw ValidationError("checkpoint: expected one segment");
      cp.params = layers_from_json(segments.at(0).at("layers"));
    } else {
      SplitBundle b;
      if (topology == "ls") {
        b.topology = Topology::ls;
      } else if (topology == "nls") {
        b.topology = Topology::nls;
      } else {
        throw ValidationError("checkpoint: unknown topology '" + topology + "'");
      }
      std::map<std::size_t, ClientSegments> clients;
      bool have_server = false;
      for (const auto& seg : segments) {
        const auto role = seg.at("role").get<std::string>();
        if (role == "server") {
          b.server = layers_from_json(seg.at("layers"));
          have_server = true;
          continue;
        }
        const auto id = seg.at("client_id").get<std::size_t>();
        auto& c = clients[id];
        c.client_id = id;
        if (role == "head") {
          c.head = layers_from_json(seg.at("layers"));
        } else if (role == "tail") {
          c.tail = layers_from_json(seg.at("layers"));
        } else {
          throw ValidationError("checkpoint: unknown segment role '" + role + "'");
        }
      }
      if (!have_server) throw ValidationError("checkpoint: missing server segment");
      for (auto& [id, c] : clients) b.clients.push_back(std::move(c));
      cp.params = std::move(b);
    }
    if (j.at("architecture_hash").get<std::string>() != std::to_string(bundle_hash(cp.params))) {
      throw ValidationError("checkpoint: architecture hash mismatch");
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("checkpoint: ") + e.what());
  } catch (const DimensionError& e) {
    throw ValidationError(std::string("checkpoint: ") + e.what());
  }
  return cp;
}

}  // namespace splitlab::proto
