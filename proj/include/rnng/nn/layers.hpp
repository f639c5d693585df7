#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "rnng/nn/graph.hpp"
#include "rnng/nn/tensor.hpp"

namespace rnng::nn {

inline constexpr double kInitScale = 0.1;
inline constexpr double kForgetBias = 1.0;

/// Weights of one LSTM cell: W_ih (4H x I), W_hh (4H x H), bias (4H).
struct RnnCellParams {
  Parameter* w_ih = nullptr;
  Parameter* w_hh = nullptr;
  Parameter* bias = nullptr;
  std::size_t input = 0;
  std::size_t hidden = 0;

  /// Uniform weights, zero bias except the forget-gate block, which starts at 1.
  static RnnCellParams create(ParameterStore& store, const std::string& prefix, std::size_t input,
                              std::size_t hidden, std::mt19937_64& rng);
  static RnnCellParams bind(ParameterStore& store, const std::string& prefix);
};

struct LstmOutput {
  std::vector<double> h;
  std::vector<double> c;
};

LstmOutput lstm_step(std::span<const double> x, std::span<const double> h, std::span<const double> c,
                     const RnnCellParams& p);

struct LstmExpr {
  Expr h;
  Expr c;
};

LstmExpr lstm_step(Graph& g, Expr x, Expr h, Expr c, const RnnCellParams& p);

enum class Activation { Identity, Tanh };

struct MlpLayer {
  Parameter* weight = nullptr;
  Parameter* bias = nullptr;
  Activation activation = Activation::Identity;
};

struct MlpParams {
  std::vector<MlpLayer> layers;

  /// `sizes` lists input, hidden..., output; hidden layers use tanh, the last is linear
  /// unless `final_activation` says otherwise.
  static MlpParams create(ParameterStore& store, const std::string& prefix, const std::vector<std::size_t>& sizes,
                          std::mt19937_64& rng, Activation final_activation = Activation::Identity);
  static MlpParams bind(ParameterStore& store, const std::string& prefix, std::size_t n_layers,
                        Activation final_activation = Activation::Identity);

  std::size_t input_size() const;
  std::size_t output_size() const;
};

std::vector<double> mlp_forward(std::span<const double> x, const MlpParams& p);
Expr mlp_forward(Graph& g, Expr x, const MlpParams& p);

/// Inverted dropout: zeroes each entry with probability `rate` and rescales the rest.
Expr dropout(Graph& g, Expr x, double rate, std::mt19937_64& rng);

class EmptyInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Runs `fwd` over seq and `bwd` over reversed seq from zero states, then
/// projects [h_fwd_final; h_bwd_final] through `proj`.
std::vector<double> bilstm_encode(std::span<const std::vector<double>> seq, const RnnCellParams& fwd,
                                  const RnnCellParams& bwd, const MlpParams& proj);
Expr bilstm_encode(Graph& g, std::span<const Expr> seq, const RnnCellParams& fwd, const RnnCellParams& bwd,
                   const MlpParams& proj);

}  // namespace rnng::nn
