#include "rnng/nn/graph.hpp"

#include <cmath>
#include <stdexcept>

namespace rnng::nn {

namespace {
std::string dims(std::size_t n) { return "[" + std::to_string(n) + "]"; }
}  // namespace

Expr Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Expr{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

void Graph::check_owner(Expr e) const {
  if (e.graph != this || e.id >= nodes_.size()) throw std::logic_error("expression from another graph");
}

const Graph::Node& Graph::node(Expr e) const {
  check_owner(e);
  return nodes_[e.id];
}

std::span<const double> Graph::param_value(const Node& n) const { return n.param->value.values(); }

std::span<const double> Graph::value(Expr e) const {
  const Node& n = node(e);
  if (n.op == Op::Param) return param_value(n);
  return n.value;
}

double Graph::scalar(Expr e) const {
  auto v = value(e);
  if (v.size() != 1) throw ShapeError("expected scalar, got " + dims(v.size()));
  return v[0];
}

Expr Graph::constant(std::vector<double> values) {
  Node n{Op::Constant, {}, std::move(values)};
  return push(std::move(n));
}

Expr Graph::parameter(Parameter& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Expr{this, it->second};
  Node n{Op::Param, {}, {}};
  n.param = &p;
  Expr e = push(std::move(n));
  param_nodes_[&p] = e.id;
  return e;
}

Expr Graph::lookup(Parameter& p, std::size_t row) {
  if (row >= p.value.rows()) {
    throw std::out_of_range("lookup row " + std::to_string(row) + " in " + p.name + " " +
                            shape_string(p.value.shape()));
  }
  const std::size_t cols = p.value.cols();
  auto src = p.value.values().subspan(row * cols, cols);
  Node n{Op::Lookup, {}, std::vector<double>(src.begin(), src.end())};
  n.param = &p;
  n.index = row;
  return push(std::move(n));
}

Expr Graph::affine(Expr bias, std::initializer_list<std::pair<Expr, Expr>> terms) {
  auto b = value(bias);
  Node n{Op::Affine, {bias.id}, std::vector<double>(b.begin(), b.end())};
  for (const auto& [w, x] : terms) {
    const Node& wn = node(w);
    if (wn.op != Op::Param) throw std::invalid_argument("affine: weight must be a parameter node");
    const Tensor& wt = wn.param->value;
    auto xv = value(x);
    if (wt.shape().size() != 2 || wt.cols() != xv.size() || wt.rows() != n.value.size()) {
      throw ShapeError("affine: W " + shape_string(wt.shape()) + " x " + dims(xv.size()) + " + b " +
                       dims(n.value.size()));
    }
    kernels::matvec_add(n.value, wt, xv);
    n.args.push_back(w.id);
    n.args.push_back(x.id);
  }
  return push(std::move(n));
}

Expr Graph::add(Expr a, Expr b) {
  auto av = value(a), bv = value(b);
  if (av.size() != bv.size()) throw ShapeError("add: " + dims(av.size()) + " vs " + dims(bv.size()));
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return push(Node{Op::Add, {a.id, b.id}, std::move(out)});
}

Expr Graph::cmul(Expr a, Expr b) {
  auto av = value(a), bv = value(b);
  if (av.size() != bv.size()) throw ShapeError("cmul: " + dims(av.size()) + " vs " + dims(bv.size()));
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return push(Node{Op::CMul, {a.id, b.id}, std::move(out)});
}

Expr Graph::scale(Expr a, double s) {
  auto av = value(a);
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * s;
  Node n{Op::Scale, {a.id}, std::move(out)};
  n.factor = s;
  return push(std::move(n));
}

Expr Graph::tanh(Expr a) {
  auto av = value(a);
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(av[i]);
  return push(Node{Op::Tanh, {a.id}, std::move(out)});
}

Expr Graph::sigmoid(Expr a) {
  auto av = value(a);
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = kernels::sigmoid(av[i]);
  return push(Node{Op::Sigmoid, {a.id}, std::move(out)});
}

Expr Graph::concat(std::span<const Expr> parts) {
  Node n{Op::Concat, {}, {}};
  for (Expr p : parts) {
    auto v = value(p);
    n.value.insert(n.value.end(), v.begin(), v.end());
    n.args.push_back(p.id);
  }
  return push(std::move(n));
}

Expr Graph::slice(Expr a, std::size_t begin, std::size_t length) {
  auto av = value(a);
  if (begin + length > av.size()) {
    throw ShapeError("slice [" + std::to_string(begin) + ", " + std::to_string(begin + length) +
                     ") of " + dims(av.size()));
  }
  Node n{Op::Slice, {a.id}, std::vector<double>(av.begin() + begin, av.begin() + begin + length)};
  n.index = begin;
  return push(std::move(n));
}

Expr Graph::lstm_step(Expr x, Expr h, Expr c, Expr w_ih, Expr w_hh, Expr bias) {
  const Node& wi = node(w_ih);
  const Node& wh = node(w_hh);
  const Node& bn = node(bias);
  if (wi.op != Op::Param || wh.op != Op::Param || bn.op != Op::Param) {
    throw std::invalid_argument("lstm_step: weights must be parameter nodes");
  }
  const std::size_t hidden = value(h).size();
  Node n{Op::LstmStep, {x.id, h.id, c.id, w_ih.id, w_hh.id, bias.id}, std::vector<double>(2 * hidden)};
  std::span<double> out(n.value);
  kernels::lstm_forward(value(x), value(h), value(c), wi.param->value, wh.param->value, bn.param->value,
                        out.subspan(0, hidden), out.subspan(hidden, hidden), &n.lstm);
  return push(std::move(n));
}

Expr Graph::log_softmax(Expr logits) {
  return push(Node{Op::LogSoftmax, {logits.id}, kernels::log_softmax(value(logits))});
}

Expr Graph::log_softmax(Expr logits, std::vector<std::size_t> allowed) {
  Node n{Op::LogSoftmax, {logits.id}, kernels::log_softmax(value(logits), allowed)};
  n.allowed = std::move(allowed);
  return push(std::move(n));
}

Expr Graph::pick(Expr a, std::size_t index) {
  auto av = value(a);
  if (index >= av.size()) throw std::out_of_range("pick " + std::to_string(index) + " of " + dims(av.size()));
  Node n{Op::Pick, {a.id}, {av[index]}};
  n.index = index;
  return push(std::move(n));
}

Expr Graph::sum_elements(Expr a) {
  double s = 0.0;
  for (double v : value(a)) s += v;
  return push(Node{Op::SumElements, {a.id}, {s}});
}

Expr Graph::sum(std::span<const Expr> scalars) {
  Node n{Op::Sum, {}, {}};
  for (Expr e : scalars) {
    auto v = value(e);
    if (n.value.empty()) n.value.assign(v.size(), 0.0);
    if (v.size() != n.value.size()) throw ShapeError("sum: mixed sizes");
    for (std::size_t i = 0; i < v.size(); ++i) n.value[i] += v[i];
    n.args.push_back(e.id);
  }
  if (n.args.empty()) n.value = {0.0};
  return push(std::move(n));
}

Expr Graph::dot(Expr a, Expr b) {
  auto av = value(a), bv = value(b);
  if (av.size() != bv.size()) throw ShapeError("dot: " + dims(av.size()) + " vs " + dims(bv.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
  return push(Node{Op::Dot, {a.id, b.id}, {s}});
}

void Graph::backward(Expr loss) {
  check_owner(loss);
  if (value(loss).size() != 1) {
    throw ShapeError("backward: loss must be scalar, got " + dims(value(loss).size()));
  }
  std::vector<std::vector<double>> grads(loss.id + 1);
  grads[loss.id] = {1.0};

  // Parameter nodes accumulate straight into Parameter::grad.
  auto sink = [&](std::uint32_t id) -> std::span<double> {
    Node& n = nodes_[id];
    if (n.op == Op::Param) return n.param->grad.values();
    auto& g = grads[id];
    if (g.empty()) g.assign(n.value.size(), 0.0);
    return g;
  };

  for (std::int64_t id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.op == Op::Param || grads[id].empty()) continue;
    const std::vector<double>& g = grads[id];
    switch (n.op) {
      case Op::Constant:
      case Op::Param:
        break;
      case Op::Lookup: {
        const std::size_t cols = n.param->value.cols();
        auto row = n.param->grad.values().subspan(n.index * cols, cols);
        for (std::size_t i = 0; i < cols; ++i) row[i] += g[i];
        break;
      }
      case Op::Affine: {
        auto gb = sink(n.args[0]);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
        for (std::size_t t = 1; t + 1 < n.args.size(); t += 2) {
          Node& wn = nodes_[n.args[t]];
          auto xv = value(Expr{this, n.args[t + 1]});
          kernels::outer_add(wn.param->grad, g, xv);
          kernels::matvec_transpose_add(sink(n.args[t + 1]), wn.param->value, g);
        }
        break;
      }
      case Op::Add: {
        for (int k = 0; k < 2; ++k) {
          auto ga = sink(n.args[k]);
          for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        break;
      }
      case Op::CMul: {
        auto av = value(Expr{this, n.args[0]});
        auto bv = value(Expr{this, n.args[1]});
        auto ga = sink(n.args[0]);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
        auto gb = sink(n.args[1]);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
        break;
      }
      case Op::Scale: {
        auto ga = sink(n.args[0]);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * n.factor;
        break;
      }
      case Op::Tanh: {
        auto ga = sink(n.args[0]);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - n.value[i] * n.value[i]);
        break;
      }
      case Op::Sigmoid: {
        auto ga = sink(n.args[0]);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * n.value[i] * (1.0 - n.value[i]);
        break;
      }
      case Op::Concat: {
        std::size_t offset = 0;
        for (std::uint32_t a : n.args) {
          auto ga = sink(a);
          for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[offset + i];
          offset += ga.size();
        }
        break;
      }
      case Op::Slice: {
        auto ga = sink(n.args[0]);
        for (std::size_t i = 0; i < g.size(); ++i) ga[n.index + i] += g[i];
        break;
      }
      case Op::LstmStep: {
        const auto& cache = n.lstm;
        const std::size_t hidden = cache.in_gate.size();
        auto cv = value(Expr{this, n.args[2]});
        std::vector<double> dpre(4 * hidden);
        std::vector<double> dc_prev(hidden);
        for (std::size_t j = 0; j < hidden; ++j) {
          const double i = cache.in_gate[j], f = cache.forget_gate[j], gg = cache.cell_gate[j];
          const double o = cache.out_gate[j], tc = cache.tanh_cell[j];
          const double dh = g[j];
          const double dc = g[hidden + j] + dh * o * (1.0 - tc * tc);
          const double d_o = dh * tc;
          const double d_i = dc * gg;
          const double d_g = dc * i;
          const double d_f = dc * cv[j];
          dc_prev[j] = dc * f;
          dpre[j] = d_i * i * (1.0 - i);
          dpre[hidden + j] = d_f * f * (1.0 - f);
          dpre[2 * hidden + j] = d_g * (1.0 - gg * gg);
          dpre[3 * hidden + j] = d_o * o * (1.0 - o);
        }
        Node& wi = nodes_[n.args[3]];
        Node& wh = nodes_[n.args[4]];
        Node& bn = nodes_[n.args[5]];
        auto xv = value(Expr{this, n.args[0]});
        auto hv = value(Expr{this, n.args[1]});
        kernels::outer_add(wi.param->grad, dpre, xv);
        kernels::outer_add(wh.param->grad, dpre, hv);
        auto gbias = bn.param->grad.values();
        for (std::size_t k = 0; k < dpre.size(); ++k) gbias[k] += dpre[k];
        kernels::matvec_transpose_add(sink(n.args[0]), wi.param->value, dpre);
        kernels::matvec_transpose_add(sink(n.args[1]), wh.param->value, dpre);
        auto gc = sink(n.args[2]);
        for (std::size_t j = 0; j < hidden; ++j) gc[j] += dc_prev[j];
        break;
      }
      case Op::LogSoftmax: {
        auto ga = sink(n.args[0]);
        if (n.allowed.empty()) {
          double gs = 0.0;
          for (double v : g) gs += v;
          for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] - std::exp(n.value[i]) * gs;
        } else {
          double gs = 0.0;
          for (std::size_t i : n.allowed) gs += g[i];
          for (std::size_t i : n.allowed) ga[i] += g[i] - std::exp(n.value[i]) * gs;
        }
        break;
      }
      case Op::Pick: {
        sink(n.args[0])[n.index] += g[0];
        break;
      }
      case Op::SumElements: {
        auto ga = sink(n.args[0]);
        for (double& v : ga) v += g[0];
        break;
      }
      case Op::Sum: {
        for (std::uint32_t a : n.args) {
          auto ga = sink(a);
          for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
        }
        break;
      }
      case Op::Dot: {
        auto av = value(Expr{this, n.args[0]});
        auto bv = value(Expr{this, n.args[1]});
        auto ga = sink(n.args[0]);
        for (std::size_t i = 0; i < av.size(); ++i) ga[i] += g[0] * bv[i];
        auto gb = sink(n.args[1]);
        for (std::size_t i = 0; i < bv.size(); ++i) gb[i] += g[0] * av[i];
        break;
      }
    }
  }
}

Expr affine(Expr bias, std::initializer_list<std::pair<Expr, Expr>> terms) {
  return bias.graph->affine(bias, terms);
}
Expr operator+(Expr a, Expr b) { return a.graph->add(a, b); }
Expr cmul(Expr a, Expr b) { return a.graph->cmul(a, b); }
Expr scale(Expr a, double s) { return a.graph->scale(a, s); }
Expr tanh(Expr a) { return a.graph->tanh(a); }
Expr sigmoid(Expr a) { return a.graph->sigmoid(a); }
Expr concat(std::span<const Expr> parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no parts");
  return parts.front().graph->concat(parts);
}
Expr slice(Expr a, std::size_t begin, std::size_t length) { return a.graph->slice(a, begin, length); }
Expr log_softmax(Expr logits) { return logits.graph->log_softmax(logits); }
Expr log_softmax(Expr logits, std::vector<std::size_t> allowed) {
  return logits.graph->log_softmax(logits, std::move(allowed));
}
Expr pick(Expr a, std::size_t index) { return a.graph->pick(a, index); }
Expr sum_elements(Expr a) { return a.graph->sum_elements(a); }
Expr sum(std::span<const Expr> scalars) {
  if (scalars.empty()) throw std::invalid_argument("sum: no terms");
  return scalars.front().graph->sum(scalars);
}
Expr dot(Expr a, Expr b) { return a.graph->dot(a, b); }

}  // namespace rnng::nn
