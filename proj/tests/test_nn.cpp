#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "rnng/nn/checkpoint.hpp"
#include "rnng/nn/gradcheck.hpp"
#include "rnng/nn/graph.hpp"
#include "rnng/nn/kernels.hpp"
#include "rnng/nn/layers.hpp"
#include "rnng/nn/optimizer.hpp"

using namespace rnng::nn;

TEST_CASE("affine on a hand example") {
  ParameterStore store;
  Parameter& w = store.add("w", {2, 2});
  w.value.storage() = {1, 2, 3, 4};
  Parameter& b = store.add("b", {2});
  b.value.storage() = {1, 1};
  Graph g;
  const Expr y = affine(g.parameter(b), {{g.parameter(w), g.constant({1, 1})}});
  const auto v = g.value(y);
  CHECK(v[0] == 4.0);
  CHECK(v[1] == 8.0);
}

TEST_CASE("affine rejects mismatched shapes") {
  ParameterStore store;
  Parameter& w = store.add("w", {2, 3});
  Parameter& b = store.add("b", {2});
  Graph g;
  CHECK_THROWS_AS(affine(g.parameter(b), {{g.parameter(w), g.constant({1, 1})}}), ShapeError);
}

TEST_CASE("lstm step with zero weights") {
  ParameterStore store;
  std::mt19937_64 rng(3);
  RnnCellParams p = RnnCellParams::create(store, "cell", 3, 2, rng);
  p.w_ih->value.fill(0.0);
  p.w_hh->value.fill(0.0);
  p.bias->value.fill(0.0);
  const std::vector<double> x = {1, -2, 3}, h = {0.5, -0.5}, c = {1.0, -2.0};
  const LstmOutput o = lstm_step(x, h, c, p);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(o.c[i] == doctest::Approx(0.5 * c[i]).epsilon(1e-15));
    CHECK(o.h[i] == doctest::Approx(0.5 * std::tanh(0.5 * c[i])).epsilon(1e-15));
  }
}

TEST_CASE("forget gate bias starts at one") {
  ParameterStore store;
  std::mt19937_64 rng(3);
  RnnCellParams p = RnnCellParams::create(store, "cell", 2, 4, rng);
  for (std::size_t i = 0; i < 16; ++i) CHECK(p.bias->value[i] == (i >= 4 && i < 8 ? kForgetBias : 0.0));
}

TEST_CASE("log_softmax normalizes") {
  const std::vector<double> logits = {1, 2, 3};
  const auto lp = kernels::log_softmax(logits);
  double total = 0.0;
  for (double v : lp) total += std::exp(v);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("masked log_softmax is a two-way softmax") {
  const std::vector<double> logits = {1, 2, 3};
  const std::vector<std::size_t> allowed = {0, 2};
  const auto lp = kernels::log_softmax(logits, allowed);
  const double z = std::log(std::exp(1.0) + std::exp(3.0));
  CHECK(lp[0] == doctest::Approx(1.0 - z).epsilon(1e-15));
  CHECK(lp[2] == doctest::Approx(3.0 - z).epsilon(1e-15));
  CHECK(lp[1] == kMaskedLogProb);
}

TEST_CASE("log_sum_exp is stable for large inputs") {
  const std::vector<double> xs = {1000.0, 1000.0};
  CHECK(kernels::log_sum_exp(xs) == doctest::Approx(1000.0 + std::log(2.0)));
}

TEST_CASE("gradient of a quadratic matches finite differences") {
  ParameterStore store;
  Parameter& x = store.add("x", {3});
  x.value.storage() = {0.3, -1.2, 2.0};
  auto loss = [&](Graph& g) {
    const Expr e = g.parameter(x);
    return g.dot(e, e);
  };
  const GradCheckResult r = finite_diff_check(store, loss);
  CHECK(r.max_relative_error < 1e-6);
  CHECK(r.coords_checked == 3);
  Graph g;
  g.backward(loss(g));
  CHECK(x.grad[1] == doctest::Approx(-2.4));
}

TEST_CASE("gradient check of the graph operations") {
  ParameterStore store;
  std::mt19937_64 rng(11);
  Parameter& a = store.add_uniform("a", {4}, 1.0, rng);
  Parameter& b = store.add_uniform("b", {4}, 1.0, rng);
  Parameter& w = store.add_uniform("w", {3, 4}, 1.0, rng);
  auto loss = [&](Graph& g) {
    const Expr pa = g.parameter(a), pb = g.parameter(b);
    const Expr mixed = g.tanh(g.add(g.cmul(pa, pb), g.scale(g.sigmoid(pb), 0.5)));
    const Expr logits = g.affine(g.slice(pa, 0, 3), {{g.parameter(w), mixed}});
    std::vector<Expr> parts = {logits, g.slice(pb, 1, 2)};
    const Expr joined = g.concat(parts);
    return g.add(g.pick(g.log_softmax(joined), 2), g.sum_elements(joined));
  };
  CHECK(finite_diff_check(store, loss).max_relative_error < 1e-6);
}

TEST_CASE("gradient check rejects an unknown stencil") {
  ParameterStore store;
  store.add("x", {1});
  GradCheckOptions opt;
  opt.order = 3;
  CHECK_THROWS(finite_diff_check(store, [&](Graph& g) { return g.sum_elements(g.parameter(store.get("x"))); }, opt));
}

TEST_CASE("adam leaves parameters alone under a zero gradient") {
  ParameterStore store;
  Parameter& p = store.add("p", {2});
  p.value.storage() = {1.0, -1.0};
  Adam opt;
  opt.step(store);
  CHECK(p.value[0] == 1.0);
  CHECK(p.value[1] == -1.0);
}

TEST_CASE("adam decreases a quadratic") {
  ParameterStore store;
  Parameter& p = store.add("p", {2});
  p.value.storage() = {2.0, -3.0};
  Adam opt(AdamConfig{0.05});
  double prev = 1e300;
  for (int i = 0; i < 100; ++i) {
    Graph g;
    const Expr e = g.parameter(p);
    const Expr loss = g.dot(e, e);
    const double v = g.scalar(loss);
    CHECK(v < prev);
    prev = v;
    g.backward(loss);
    opt.step(store);
  }
  CHECK(prev < 1.0);
}

TEST_CASE("adam clips by global norm and reports the raw norm") {
  ParameterStore store;
  Parameter& p = store.add("p", {2});
  p.grad.storage() = {30.0, 40.0};
  AdamConfig cfg;
  cfg.clip_threshold = 5.0;
  Adam opt(cfg);
  CHECK(opt.step(store) == doctest::Approx(50.0));
  CHECK(p.grad[0] == 0.0);
  CHECK(p.value[0] == doctest::Approx(-cfg.learning_rate).epsilon(1e-6));
}

TEST_CASE("adam rejects non-finite gradients") {
  ParameterStore store;
  Parameter& p = store.add("p", {1});
  p.grad[0] = std::nan("");
  Adam opt;
  CHECK_THROWS_AS(opt.step(store), NonFiniteGradientError);
}

TEST_CASE("checkpoint round trip is exact") {
  ParameterStore store;
  std::mt19937_64 rng(5);
  store.add_uniform("a", {3, 2}, 1.0, rng);
  store.add_uniform("b", {4}, 1.0, rng);
  const auto path = std::filesystem::temp_directory_path() / "rnng_test_ckpt.json";
  save_checkpoint(path, store, {{"note", "x"}});
  const Checkpoint ck = load_checkpoint(path);
  CHECK(ck.metadata.at("note") == "x");
  ParameterStore other;
  other.add("a", {3, 2});
  other.add("b", {4});
  restore_parameters(other, ck);
  for (const auto& name : {"a", "b"}) CHECK(other.get(name).value.storage() == store.get(name).value.storage());

  ParameterStore wrong;
  wrong.add("a", {2, 3});
  wrong.add("b", {4});
  CHECK_THROWS_AS(restore_parameters(wrong, ck), CheckpointError);
  std::filesystem::remove(path);
}

TEST_CASE("dropout keeps the expectation") {
  Graph g;
  std::mt19937_64 rng(9);
  const Expr x = g.constant(std::vector<double>(20000, 1.0));
  const auto v = g.value(dropout(g, x, 0.25, rng));
  double total = 0.0;
  std::size_t zeros = 0;
  for (double d : v) {
    total += d;
    zeros += d == 0.0;
  }
  CHECK(total / 20000.0 == doctest::Approx(1.0).epsilon(0.03));
  CHECK(static_cast<double>(zeros) / 20000.0 == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("bilstm encoder rejects empty input") {
  ParameterStore store;
  std::mt19937_64 rng(1);
  const auto f = RnnCellParams::create(store, "f", 2, 2, rng);
  const auto b = RnnCellParams::create(store, "b", 2, 2, rng);
  const auto proj = MlpParams::create(store, "p", {4, 2}, rng);
  const std::vector<std::vector<double>> none;
  CHECK_THROWS_AS(bilstm_encode(none, f, b, proj), EmptyInputError);
}
