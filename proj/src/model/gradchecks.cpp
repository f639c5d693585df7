#include "rnng/model/gradchecks.hpp"

#include <random>

#include "rnng/corpus/oracle.hpp"
#include "rnng/corpus/toy.hpp"
#include "rnng/corpus/tree.hpp"
#include "rnng/corpus/vocab.hpp"
#include "rnng/model/rnng.hpp"
#include "rnng/nn/graph.hpp"
#include "rnng/nn/layers.hpp"

namespace rnng::model {

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

nn::Parameter& perturb(nn::Parameter& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (auto& x : p.value.values()) x += u(rng);
  return p;
}

}  // namespace

std::vector<GradCheckCase> run_gradient_checks(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> dim(2, 5);
  nn::GradCheckOptions opts;
  opts.seed = seed;
  std::vector<GradCheckCase> out;

  {
    const std::size_t in = dim(rng), hid = dim(rng);
    nn::ParameterStore store;
    const auto cell = nn::RnnCellParams::create(store, "cell", in, hid, rng);
    for (auto& p : store) perturb(*p, rng);
    const auto x = random_vector(in, rng), h = random_vector(hid, rng), c = random_vector(hid, rng);
    const auto rh = random_vector(hid, rng), rc = random_vector(hid, rng);
    auto loss = [&](nn::Graph& g) {
      const auto o = nn::lstm_step(g, g.constant(x), g.constant(h), g.constant(c), cell);
      return g.add(g.dot(o.h, g.constant(rh)), g.dot(o.c, g.constant(rc)));
    };
    out.push_back({"lstm_step", seed, in, hid, nn::finite_diff_check(store, loss, opts)});
  }

  const auto trees = corpus::generate_toy_treebank(4, seed, 6);
  const corpus::Vocab vocab = corpus::build_vocab(trees, 1);

  {
    ModelConfig mc;
    mc.embedding = dim(rng);
    mc.hidden = dim(rng);
    mc.scorer_hidden = dim(rng);
    mc.composition_hidden = dim(rng);
    mc.seed = seed;
    RnngModel m(vocab, mc);
    for (auto& p : m.params()) perturb(*p, rng);
    const std::size_t n = dim(rng) - 1;
    std::vector<std::vector<double>> daughters;
    for (std::size_t i = 0; i < n; ++i) daughters.push_back(random_vector(mc.embedding, rng));
    const auto r = random_vector(mc.embedding, rng);
    const NtId mother = static_cast<NtId>(rng() % vocab.nt_count());
    auto loss = [&](nn::Graph& g) {
      std::vector<nn::Expr> ds;
      for (const auto& d : daughters) ds.push_back(g.constant(d));
      return g.dot(m.compose(g, mother, ds), g.constant(r));
    };
    out.push_back({"composition", seed, mc.embedding, mc.composition_hidden, nn::finite_diff_check(m.params(), loss, opts)});
  }

  {
    ModelConfig mc;
    mc.embedding = dim(rng);
    mc.hidden = dim(rng);
    mc.scorer_hidden = dim(rng);
    mc.composition_hidden = dim(rng);
    mc.seed = seed + 1;
    RnngModel m(vocab, mc);
    for (auto& p : m.params()) perturb(*p, rng);
    const corpus::Tree& t = trees[rng() % trees.size()];
    const auto actions = m.to_model_actions(corpus::tree_to_actions(t));
    const std::size_t len = corpus::count_terminals(t);
    auto loss = [&](nn::Graph& g) { return m.oracle_nll(g, actions, len); };
    nn::GradCheckOptions wide = opts;
    wide.step = 1e-2;
    wide.order = 4;
    out.push_back({"sentence_loss", seed, mc.embedding, mc.hidden, nn::finite_diff_check(m.params(), loss, wide)});
  }
  return out;
}

}  // namespace rnng::model
