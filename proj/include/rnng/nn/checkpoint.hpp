#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rnng/nn/tensor.hpp"

namespace rnng::nn {

inline constexpr int kCheckpointVersion = 1;
inline constexpr const char* kCheckpointFormat = "rnng-checkpoint";

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// JSON container: {"format", "version", "metadata": {...}, "parameters": [{"name", "shape", "values"}]}.
/// Values are written with round-trip precision.
struct Checkpoint {
  nlohmann::json metadata;
  std::vector<std::pair<std::string, Tensor>> tensors;
};

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& store, const nlohmann::json& metadata);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies checkpoint tensors into `store`. Names and shapes must match exactly.
void restore_parameters(ParameterStore& store, const Checkpoint& ckpt);

}  // namespace rnng::nn
