#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rnng/nn/gradcheck.hpp"

namespace rnng::model {

struct GradCheckCase {
  std::string name;  // lstm_step, composition, sentence_loss
  std::uint64_t seed = 0;
  std::size_t input = 0;
  std::size_t hidden = 0;
  nn::GradCheckResult result;
};

/// Finite-difference checks of one LSTM step, the composition function and a
/// full RNNG sentence loss, on shapes drawn from 2..5 with `seed`.
std::vector<GradCheckCase> run_gradient_checks(std::uint64_t seed);

}  // namespace rnng::model
