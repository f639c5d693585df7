#include "rnng/nn/layers.hpp"

#include <cmath>

#include "rnng/nn/kernels.hpp"

namespace rnng::nn {

RnnCellParams RnnCellParams::create(ParameterStore& store, const std::string& prefix, std::size_t input,
                                    std::size_t hidden, std::mt19937_64& rng) {
  RnnCellParams p;
  p.w_ih = &store.add_uniform(prefix + ".w_ih", {4 * hidden, input}, kInitScale, rng);
  p.w_hh = &store.add_uniform(prefix + ".w_hh", {4 * hidden, hidden}, kInitScale, rng);
  p.bias = &store.add(prefix + ".bias", {4 * hidden});
  for (std::size_t j = 0; j < hidden; ++j) p.bias->value[hidden + j] = kForgetBias;
  p.input = input;
  p.hidden = hidden;
  return p;
}

RnnCellParams RnnCellParams::bind(ParameterStore& store, const std::string& prefix) {
  RnnCellParams p;
  p.w_ih = &store.get(prefix + ".w_ih");
  p.w_hh = &store.get(prefix + ".w_hh");
  p.bias = &store.get(prefix + ".bias");
  p.hidden = p.w_hh->value.cols();
  p.input = p.w_ih->value.cols();
  return p;
}

LstmOutput lstm_step(std::span<const double> x, std::span<const double> h, std::span<const double> c,
                     const RnnCellParams& p) {
  if (x.size() != p.input || h.size() != p.hidden || c.size() != p.hidden) {
    throw ShapeError("lstm_step: x [" + std::to_string(x.size()) + "] h [" + std::to_string(h.size()) + "] c [" +
                     std::to_string(c.size()) + "] for cell " + std::to_string(p.input) + "->" +
                     std::to_string(p.hidden));
  }
  LstmOutput out{std::vector<double>(p.hidden), std::vector<double>(p.hidden)};
  kernels::lstm_forward(x, h, c, p.w_ih->value, p.w_hh->value, p.bias->value, out.h, out.c, nullptr);
  return out;
}

LstmExpr lstm_step(Graph& g, Expr x, Expr h, Expr c, const RnnCellParams& p) {
  if (g.value(x).size() != p.input || g.value(h).size() != p.hidden || g.value(c).size() != p.hidden) {
    throw ShapeError("lstm_step: x [" + std::to_string(g.value(x).size()) + "] for cell " +
                     std::to_string(p.input) + "->" + std::to_string(p.hidden));
  }
  Expr both = g.lstm_step(x, h, c, g.parameter(*p.w_ih), g.parameter(*p.w_hh), g.parameter(*p.bias));
  return {g.slice(both, 0, p.hidden), g.slice(both, p.hidden, p.hidden)};
}

MlpParams MlpParams::create(ParameterStore& store, const std::string& prefix, const std::vector<std::size_t>& sizes,
                            std::mt19937_64& rng, Activation final_activation) {
  if (sizes.size() < 2) throw std::invalid_argument("mlp needs at least input and output sizes");
  MlpParams p;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::string name = prefix + ".l" + std::to_string(l);
    MlpLayer layer;
    layer.weight = &store.add_uniform(name + ".w", {sizes[l + 1], sizes[l]}, kInitScale, rng);
    layer.bias = &store.add(name + ".b", {sizes[l + 1]});
    layer.activation = (l + 2 == sizes.size()) ? final_activation : Activation::Tanh;
    p.layers.push_back(layer);
  }
  return p;
}

MlpParams MlpParams::bind(ParameterStore& store, const std::string& prefix, std::size_t n_layers,
                          Activation final_activation) {
  MlpParams p;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::string name = prefix + ".l" + std::to_string(l);
    MlpLayer layer;
    layer.weight = &store.get(name + ".w");
    layer.bias = &store.get(name + ".b");
    layer.activation = (l + 1 == n_layers) ? final_activation : Activation::Tanh;
    p.layers.push_back(layer);
  }
  return p;
}

std::size_t MlpParams::input_size() const { return layers.front().weight->value.cols(); }
std::size_t MlpParams::output_size() const { return layers.back().weight->value.rows(); }

std::vector<double> mlp_forward(std::span<const double> x, const MlpParams& p) {
  std::vector<double> cur(x.begin(), x.end());
  for (const MlpLayer& layer : p.layers) {
    const Tensor& b = layer.bias->value;
    std::vector<double> next(b.values().begin(), b.values().end());
    kernels::matvec_add(next, layer.weight->value, cur);
    if (layer.activation == Activation::Tanh) {
      for (double& v : next) v = std::tanh(v);
    }
    cur = std::move(next);
  }
  return cur;
}

Expr mlp_forward(Graph& g, Expr x, const MlpParams& p) {
  Expr cur = x;
  for (const MlpLayer& layer : p.layers) {
    cur = g.affine(g.parameter(*layer.bias), {{g.parameter(*layer.weight), cur}});
    if (layer.activation == Activation::Tanh) cur = g.tanh(cur);
  }
  return cur;
}

Expr dropout(Graph& g, Expr x, double rate, std::mt19937_64& rng) {
  if (rate <= 0.0) return x;
  if (rate >= 1.0) throw std::invalid_argument("dropout rate must be below 1");
  std::bernoulli_distribution keep(1.0 - rate);
  std::vector<double> mask(g.value(x).size());
  for (double& m : mask) m = keep(rng) ? 1.0 / (1.0 - rate) : 0.0;
  return g.cmul(x, g.constant(std::move(mask)));
}

std::vector<double> bilstm_encode(std::span<const std::vector<double>> seq, const RnnCellParams& fwd,
                                  const RnnCellParams& bwd, const MlpParams& proj) {
  if (seq.empty()) throw EmptyInputError("bilstm_encode: empty sequence");
  LstmOutput f{std::vector<double>(fwd.hidden, 0.0), std::vector<double>(fwd.hidden, 0.0)};
  for (const auto& x : seq) f = lstm_step(x, f.h, f.c, fwd);
  LstmOutput b{std::vector<double>(bwd.hidden, 0.0), std::vector<double>(bwd.hidden, 0.0)};
  for (auto it = seq.rbegin(); it != seq.rend(); ++it) b = lstm_step(*it, b.h, b.c, bwd);
  std::vector<double> both = f.h;
  both.insert(both.end(), b.h.begin(), b.h.end());
  return mlp_forward(both, proj);
}

Expr bilstm_encode(Graph& g, std::span<const Expr> seq, const RnnCellParams& fwd, const RnnCellParams& bwd,
                   const MlpParams& proj) {
  if (seq.empty()) throw EmptyInputError("bilstm_encode: empty sequence");
  LstmExpr f{g.constant(std::vector<double>(fwd.hidden, 0.0)), g.constant(std::vector<double>(fwd.hidden, 0.0))};
  for (Expr x : seq) f = lstm_step(g, x, f.h, f.c, fwd);
  LstmExpr b{g.constant(std::vector<double>(bwd.hidden, 0.0)), g.constant(std::vector<double>(bwd.hidden, 0.0))};
  for (auto it = seq.rbegin(); it != seq.rend(); ++it) b = lstm_step(g, *it, b.h, b.c, bwd);
  const Expr parts[] = {f.h, b.h};
  return mlp_forward(g, g.concat(parts), proj);
}

}  // namespace rnng::nn
