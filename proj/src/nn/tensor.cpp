#include "rnng/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace rnng::nn {

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

namespace {
std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}
}  // namespace

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), values_(element_count(shape_), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != element_count(shape_)) {
    throw ShapeError("tensor of shape " + shape_string(shape_) + " given " +
                     std::to_string(values_.size()) + " values");
  }
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Parameter& ParameterStore::add(const std::string& name, Shape shape) {
  if (by_name_.count(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->value = Tensor(shape);
  p->grad = Tensor(shape);
  Parameter* raw = p.get();
  params_.push_back(std::move(p));
  by_name_[name] = raw;
  return *raw;
}

Parameter& ParameterStore::add_uniform(const std::string& name, Shape shape, double scale,
                                       std::mt19937_64& rng) {
  Parameter& p = add(name, std::move(shape));
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (double& v : p.value.storage()) v = dist(rng);
  return p;
}

Parameter* ParameterStore::find(const std::string& name) {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second;
}

const Parameter* ParameterStore::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second;
}

Parameter& ParameterStore::get(const std::string& name) {
  if (Parameter* p = find(name)) return *p;
  throw std::out_of_range("unknown parameter: " + name);
}

const Parameter& ParameterStore::get(const std::string& name) const {
  if (const Parameter* p = find(name)) return *p;
  throw std::out_of_range("unknown parameter: " + name);
}

std::size_t ParameterStore::total_values() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->grad.fill(0.0);
}

}  // namespace rnng::nn
