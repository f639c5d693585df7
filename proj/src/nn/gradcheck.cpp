#include "rnng/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace rnng::nn {

namespace {
double evaluate(const LossBuilder& loss) {
  Graph g;
  return g.scalar(loss(g));
}
}  // namespace

GradCheckResult finite_diff_check(ParameterStore& store, const LossBuilder& loss, const GradCheckOptions& options) {
  if (options.order != 2 && options.order != 4) throw std::invalid_argument("finite_diff_check: order must be 2 or 4");
  store.zero_grad();
  {
    Graph g;
    g.backward(loss(g));
  }
  std::vector<std::vector<double>> analytic;
  for (const auto& p : store) analytic.push_back(p->grad.storage());
  store.zero_grad();

  std::mt19937_64 rng(options.seed);
  GradCheckResult result;
  std::size_t k = 0;
  for (auto& p : store) {
    std::vector<std::size_t> coords(p->value.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (options.max_coords_per_param && coords.size() > options.max_coords_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords_per_param);
    }
    for (std::size_t i : coords) {
      double& x = p->value[i];
      const double saved = x;
      auto at = [&](double offset) {
        x = saved + offset;
        const double v = evaluate(loss);
        x = saved;
        return v;
      };
      const double h = options.step;
      const double numeric = options.order == 4
                                 ? (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h)
                                 : (at(h) - at(-h)) / (2.0 * h);
      const double a = analytic[k][i];
      const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      ++result.coords_checked;
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_parameter = p->name;
        result.worst_index = i;
      }
    }
    ++k;
  }
  return result;
}

}  // namespace rnng::nn
