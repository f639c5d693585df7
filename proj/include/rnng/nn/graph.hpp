#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rnng/nn/kernels.hpp"
#include "rnng/nn/tensor.hpp"

namespace rnng::nn {

class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while its graph lives.
struct Expr {
  Graph* graph = nullptr;
  std::uint32_t id = 0;
};

/// Tape-based reverse-mode autodiff arena. Nodes are appended in evaluation
/// order, so reverse index order is a valid backward schedule. One graph per
/// training example (or per parsed sentence); graphs are not thread-safe.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Expr constant(std::vector<double> values);
  /// Whole-parameter node; repeated calls for the same parameter share a node.
  Expr parameter(Parameter& p);
  /// Row `row` of a matrix parameter, as a vector.
  Expr lookup(Parameter& p, std::size_t row);

  std::span<const double> value(Expr e) const;
  double scalar(Expr e) const;
  std::size_t size() const { return nodes_.size(); }

  /// Accumulates d(loss)/d(param) into every reachable Parameter::grad.
  void backward(Expr loss);

  // Operations. Free functions below forward to these.
  Expr affine(Expr bias, std::initializer_list<std::pair<Expr, Expr>> terms);
  Expr add(Expr a, Expr b);
  Expr cmul(Expr a, Expr b);
  Expr scale(Expr a, double s);
  Expr tanh(Expr a);
  Expr sigmoid(Expr a);
  Expr concat(std::span<const Expr> parts);
  Expr slice(Expr a, std::size_t begin, std::size_t length);
  /// Fused LSTM step; the result is [h'; c'] of length 2H.
  Expr lstm_step(Expr x, Expr h, Expr c, Expr w_ih, Expr w_hh, Expr bias);
  Expr log_softmax(Expr logits);
  Expr log_softmax(Expr logits, std::vector<std::size_t> allowed);
  Expr pick(Expr a, std::size_t index);
  Expr sum_elements(Expr a);
  Expr sum(std::span<const Expr> scalars);
  Expr dot(Expr a, Expr b);

 private:
  enum class Op : std::uint8_t {
    Constant, Param, Lookup, Affine, Add, CMul, Scale, Tanh, Sigmoid, Concat, Slice,
    LstmStep, LogSoftmax, Pick, SumElements, Sum, Dot
  };
  struct Node {
    Op op;
    std::vector<std::uint32_t> args;
    std::vector<double> value;
    Parameter* param = nullptr;
    std::size_t index = 0;  // lookup row, slice begin, pick index
    double factor = 1.0;
    std::vector<std::size_t> allowed;
    kernels::LstmCache lstm;
  };

  Expr push(Node node);
  const Node& node(Expr e) const;
  void check_owner(Expr e) const;
  std::span<const double> param_value(const Node& n) const;

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::uint32_t> param_nodes_;
};

Expr affine(Expr bias, std::initializer_list<std::pair<Expr, Expr>> terms);
Expr operator+(Expr a, Expr b);
Expr cmul(Expr a, Expr b);
Expr scale(Expr a, double s);
Expr tanh(Expr a);
Expr sigmoid(Expr a);
Expr concat(std::span<const Expr> parts);
Expr slice(Expr a, std::size_t begin, std::size_t length);
Expr log_softmax(Expr logits);
Expr log_softmax(Expr logits, std::vector<std::size_t> allowed);
Expr pick(Expr a, std::size_t index);
Expr sum_elements(Expr a);
Expr sum(std::span<const Expr> scalars);
Expr dot(Expr a, Expr b);

}  // namespace rnng::nn
