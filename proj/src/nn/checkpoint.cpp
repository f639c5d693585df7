#include "rnng/nn/checkpoint.hpp"

#include <fstream>
#include <set>

namespace rnng::nn {

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& store, const nlohmann::json& metadata) {
  nlohmann::json doc;
  doc["format"] = kCheckpointFormat;
  doc["version"] = kCheckpointVersion;
  doc["metadata"] = metadata;
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : store) {
    params.push_back({{"name", p->name}, {"shape", p->value.shape()}, {"values", p->value.storage()}});
  }
  doc["parameters"] = std::move(params);
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out << doc.dump() << '\n';
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("malformed checkpoint " + path.string() + ": " + e.what());
  }
  if (doc.value("format", "") != kCheckpointFormat) throw CheckpointError("not a checkpoint: " + path.string());
  const int version = doc.value("version", -1);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version) + " in " + path.string());
  }
  Checkpoint ckpt;
  ckpt.metadata = doc.value("metadata", nlohmann::json::object());
  try {
    for (const auto& entry : doc.at("parameters")) {
      Shape shape = entry.at("shape").get<Shape>();
      std::vector<double> values = entry.at("values").get<std::vector<double>>();
      ckpt.tensors.emplace_back(entry.at("name").get<std::string>(), Tensor(std::move(shape), std::move(values)));
    }
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("malformed parameter block in " + path.string() + ": " + e.what());
  } catch (const ShapeError& e) {
    throw CheckpointError(std::string("inconsistent tensor in ") + path.string() + ": " + e.what());
  }
  return ckpt;
}

void restore_parameters(ParameterStore& store, const Checkpoint& ckpt) {
  std::set<std::string> seen;
  for (const auto& [name, tensor] : ckpt.tensors) {
    Parameter* p = store.find(name);
    if (!p) throw CheckpointError("checkpoint parameter not in model: " + name);
    if (p->value.shape() != tensor.shape()) {
      throw CheckpointError("shape mismatch for " + name + ": model " + shape_string(p->value.shape()) +
                            ", checkpoint " + shape_string(tensor.shape()));
    }
    p->value = tensor;
    seen.insert(name);
  }
  for (const auto& p : store) {
    if (!seen.count(p->name)) throw CheckpointError("checkpoint lacks parameter " + p->name);
  }
}

}  // namespace rnng::nn
