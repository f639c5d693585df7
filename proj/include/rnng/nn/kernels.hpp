#pragma once

// Value-only numeric kernels. The autodiff graph calls these for its forward
// pass, and inference code calls them directly, so both paths produce
// bit-identical values.

#include <span>
#include <vector>

#include "rnng/nn/tensor.hpp"

namespace rnng::nn {

/// Log-probability written into masked-out positions of a masked log_softmax.
inline constexpr double kMaskedLogProb = -1.0e30;

namespace kernels {

/// out += W x
void matvec_add(std::span<double> out, const Tensor& w, std::span<const double> x);
/// out += W^T g
void matvec_transpose_add(std::span<double> out, const Tensor& w, std::span<const double> g);
/// G += g x^T
void outer_add(Tensor& grad, std::span<const double> g, std::span<const double> x);

double log_sum_exp(std::span<const double> xs);

std::vector<double> log_softmax(std::span<const double> logits);
/// Normalizes over `allowed` only; every other entry is kMaskedLogProb.
std::vector<double> log_softmax(std::span<const double> logits, std::span<const std::size_t> allowed);

double sigmoid(double x);

/// Intermediate activations of one LSTM step, kept for the backward pass.
struct LstmCache {
  std::vector<double> in_gate, forget_gate, cell_gate, out_gate, tanh_cell;
};

/// Standard LSTM cell. Gate blocks of w_ih/w_hh/bias are ordered input,
/// forget, cell, output.
void lstm_forward(std::span<const double> x, std::span<const double> h, std::span<const double> c,
                  const Tensor& w_ih, const Tensor& w_hh, const Tensor& bias, std::span<double> h_out,
                  std::span<double> c_out, LstmCache* cache);

}  // namespace kernels
}  // namespace rnng::nn
