#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rnng/nn/tensor.hpp"

namespace rnng::nn {

class NonFiniteGradientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Global gradient-norm clip; <= 0 disables clipping.
  double clip_threshold = 5.0;
};

/// Adam with global-norm clipping. Moment buffers follow the store's
/// registration order, so one optimizer serves exactly one store.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  /// Applies one update from the gradients held in `store`, then zeroes them.
  /// Returns the pre-clip global gradient norm.
  double step(ParameterStore& store);

  const AdamConfig& config() const { return config_; }
  std::uint64_t steps() const { return steps_; }

 private:
  AdamConfig config_;
  std::uint64_t steps_ = 0;
  std::vector<std::vector<double>> first_, second_;
};

}  // namespace rnng::nn
