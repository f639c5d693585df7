#include "rnng/nn/optimizer.hpp"

#include <cmath>

namespace rnng::nn {

double Adam::step(ParameterStore& store) {
  if (first_.size() != store.size()) {
    if (!first_.empty()) throw std::logic_error("optimizer bound to a different parameter store");
    for (const auto& p : store) {
      first_.emplace_back(p->value.size(), 0.0);
      second_.emplace_back(p->value.size(), 0.0);
    }
  }

  double sq = 0.0;
  for (const auto& p : store) {
    for (double g : p->grad.values()) {
      if (!std::isfinite(g)) throw NonFiniteGradientError("non-finite gradient in parameter " + p->name);
      sq += g * g;
    }
  }
  const double norm = std::sqrt(sq);
  double factor = 1.0;
  if (config_.clip_threshold > 0.0 && norm > config_.clip_threshold) factor = config_.clip_threshold / norm;

  ++steps_;
  const double t = static_cast<double>(steps_);
  const double correct1 = 1.0 - std::pow(config_.beta1, t);
  const double correct2 = 1.0 - std::pow(config_.beta2, t);
  std::size_t k = 0;
  for (auto& p : store) {
    auto values = p->value.values();
    auto grads = p->grad.values();
    auto& m = first_[k];
    auto& v = second_[k];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grads[i] * factor;
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      const double mhat = m[i] / correct1;
      const double vhat = v[i] / correct2;
      values[i] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
      grads[i] = 0.0;
    }
    ++k;
  }
  return norm;
}

}  // namespace rnng::nn
