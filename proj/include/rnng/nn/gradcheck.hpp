#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "rnng/nn/graph.hpp"
#include "rnng/nn/tensor.hpp"

namespace rnng::nn {

/// Builds a scalar loss in a fresh graph from the store's current values.
using LossBuilder = std::function<Expr(Graph&)>;

struct GradCheckOptions {
  double step = 1e-4;
  /// 2: central difference; 4: five-point stencil, which tolerates a larger
  /// step and so keeps rounding noise below very small gradients.
  int order = 2;
  /// Coordinates sampled per parameter; 0 checks every coordinate.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  std::size_t coords_checked = 0;
};

/// Compares backprop gradients with central differences. Relative error per
/// coordinate is |a - n| / max(|a|, |n|, 1e-8). Leaves parameter values and
/// gradients as it found them (gradients zeroed).
GradCheckResult finite_diff_check(ParameterStore& store, const LossBuilder& loss, const GradCheckOptions& options = {});

}  // namespace rnng::nn
