#include "rnng/nn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rnng::nn::kernels {

void matvec_add(std::span<double> out, const Tensor& w, std::span<const double> x) {
  const std::size_t rows = w.rows(), cols = w.cols();
  if (out.size() != rows || x.size() != cols) {
    throw ShapeError("matvec: matrix " + shape_string(w.shape()) + " vs input [" +
                     std::to_string(x.size()) + "] and output [" + std::to_string(out.size()) + "]");
  }
  const double* wp = w.values().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = wp + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    out[r] += acc;
  }
}

void matvec_transpose_add(std::span<double> out, const Tensor& w, std::span<const double> g) {
  const std::size_t rows = w.rows(), cols = w.cols();
  const double* wp = w.values().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    const double* row = wp + r * cols;
    for (std::size_t c = 0; c < cols; ++c) out[c] += row[c] * gr;
  }
}

void outer_add(Tensor& grad, std::span<const double> g, std::span<const double> x) {
  const std::size_t cols = grad.cols();
  double* gp = grad.values().data();
  for (std::size_t r = 0; r < g.size(); ++r) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    double* row = gp + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += gr * x[c];
  }
}

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

std::vector<double> log_softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("log_softmax: empty input");
  const double z = log_sum_exp(logits);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - z;
  return out;
}

std::vector<double> log_softmax(std::span<const double> logits, std::span<const std::size_t> allowed) {
  if (allowed.empty()) throw std::invalid_argument("log_softmax: empty mask");
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i : allowed) {
    if (i >= logits.size()) throw std::out_of_range("log_softmax: mask index out of range");
    m = std::max(m, logits[i]);
  }
  double s = 0.0;
  for (std::size_t i : allowed) s += std::exp(logits[i] - m);
  const double z = m + std::log(s);
  std::vector<double> out(logits.size(), kMaskedLogProb);
  for (std::size_t i : allowed) out[i] = logits[i] - z;
  return out;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void lstm_forward(std::span<const double> x, std::span<const double> h, std::span<const double> c,
                  const Tensor& w_ih, const Tensor& w_hh, const Tensor& bias, std::span<double> h_out,
                  std::span<double> c_out, LstmCache* cache) {
  const std::size_t hidden = h.size();
  if (w_ih.rows() != 4 * hidden || w_hh.rows() != 4 * hidden || w_hh.cols() != hidden ||
      bias.size() != 4 * hidden || c.size() != hidden || w_ih.cols() != x.size()) {
    throw ShapeError("lstm_step: input [" + std::to_string(x.size()) + "], hidden [" +
                     std::to_string(hidden) + "], cell [" + std::to_string(c.size()) + "] vs W_ih " +
                     shape_string(w_ih.shape()) + ", W_hh " + shape_string(w_hh.shape()));
  }
  std::vector<double> pre(bias.values().begin(), bias.values().end());
  matvec_add(pre, w_ih, x);
  matvec_add(pre, w_hh, h);
  if (cache) {
    cache->in_gate.resize(hidden);
    cache->forget_gate.resize(hidden);
    cache->cell_gate.resize(hidden);
    cache->out_gate.resize(hidden);
    cache->tanh_cell.resize(hidden);
  }
  for (std::size_t j = 0; j < hidden; ++j) {
    const double i = sigmoid(pre[j]);
    const double f = sigmoid(pre[hidden + j]);
    const double g = std::tanh(pre[2 * hidden + j]);
    const double o = sigmoid(pre[3 * hidden + j]);
    const double cn = f * c[j] + i * g;
    const double tc = std::tanh(cn);
    c_out[j] = cn;
    h_out[j] = o * tc;
    if (cache) {
      cache->in_gate[j] = i;
      cache->forget_gate[j] = f;
      cache->cell_gate[j] = g;
      cache->out_gate[j] = o;
      cache->tanh_cell[j] = tc;
    }
  }
}

}  // namespace rnng::nn::kernels
