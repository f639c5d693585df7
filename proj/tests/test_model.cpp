#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "rnng/corpus/oracle.hpp"
#include "rnng/corpus/toy.hpp"
#include "rnng/model/rnng.hpp"
#include "rnng/model/training.hpp"

using namespace rnng;
using namespace rnng::model;

namespace {

RnngModel small_model(Variant variant, std::uint64_t seed = 4) {
  const auto trees = corpus::generate_toy_treebank(50, seed);
  ModelConfig cfg;
  cfg.variant = variant;
  cfg.embedding = 6;
  cfg.hidden = 8;
  cfg.scorer_hidden = 7;
  cfg.composition_hidden = 5;
  cfg.seed = seed;
  return RnngModel(corpus::build_vocab(trees, 1), cfg);
}

ParserState run(const RnngModel& m, const corpus::Tree& t) {
  ParserState s = m.init_state();
  const auto words = corpus::yield(t);
  for (const Action& a : m.to_model_actions(corpus::tree_to_actions(t))) s = m.apply_action(s, a, words.size(), {});
  return s;
}

}  // namespace

TEST_CASE("valid action kinds") {
  const Limits limits;
  auto kinds = [&](DerivationView v, bool done) { return valid_kinds(v, done, limits); };
  CHECK(kinds({0, false, false}, false) == ActionMask{true, false, false});
  CHECK(kinds({1, true, true}, false) == ActionMask{true, true, false});
  CHECK(kinds({1, false, true}, false) == ActionMask{true, true, false});
  CHECK(kinds({1, false, true}, true) == ActionMask{false, false, true});
  CHECK(kinds({2, false, true}, false) == ActionMask{true, true, true});
  CHECK(kinds({0, false, true}, true) == ActionMask{false, false, false});
  Limits tight;
  tight.max_open = 2;
  CHECK(valid_kinds({2, false, true}, false, tight) == ActionMask{false, true, true});
  tight.allow_early_root_close = true;
  CHECK(valid_kinds({1, false, true}, false, tight) == ActionMask{true, true, true});
}

TEST_CASE("action distribution sums to one") {
  for (Variant v : {Variant::Full, Variant::NoComp}) {
    const RnngModel m = small_model(v);
    const corpus::Tree t = corpus::generate_toy_treebank(1, 8).front();
    const auto words = corpus::yield(t);
    ParserState s = m.init_state();
    for (const Action& a : m.to_model_actions(corpus::tree_to_actions(t))) {
      const ActionMask mask = m.valid_actions(s, s.words_emitted() == words.size(), {});
      const auto kind = m.score_actions(s, mask);
      double total = 0.0;
      if (mask[0]) {
        for (double lp : m.score_nonterminal(s)) total += std::exp(kind[0] + lp);
      }
      if (mask[1]) {
        for (double lp : m.score_word(s)) total += std::exp(kind[1] + lp);
      }
      if (mask[2]) total += std::exp(kind[2]);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      s = m.apply_action(s, a, words.size(), {});
    }
  }
}

TEST_CASE("tree log-probability is the sum of its actions") {
  for (Variant v : {Variant::Full, Variant::NoComp}) {
    const RnngModel m = small_model(v);
    for (const corpus::Tree& t : corpus::generate_toy_treebank(5, 9)) {
      const auto words = corpus::yield(t);
      const auto actions = m.to_model_actions(corpus::tree_to_actions(t));
      ParserState s = m.init_state();
      double sum = 0.0;
      for (const Action& a : actions) {
        sum += m.action_log_prob(s, a, words.size(), {});
        s = m.apply_action(s, a, words.size(), {});
      }
      CHECK(s.log_prob() == doctest::Approx(sum).epsilon(1e-12));
      CHECK(m.tree_logprob(t) == doctest::Approx(sum).epsilon(1e-12));
      nn::Graph g;
      CHECK(-g.scalar(m.oracle_nll(g, actions, words.size())) == doctest::Approx(sum).epsilon(1e-10));
      CHECK(s.finished());
      CHECK(m.to_tree(s, words) == t);
    }
  }
}

TEST_CASE("reduce replaces a constituent in the full variant and appends in no-comp") {
  const corpus::Tree t = corpus::parse_bracketed("(S (NP the cat) (VP sleeps))");
  const auto words = corpus::yield(t);
  for (Variant v : {Variant::Full, Variant::NoComp}) {
    const RnngModel m = small_model(v);
    const auto actions = m.to_model_actions(corpus::tree_to_actions(t));
    ParserState s = m.init_state();
    for (std::size_t i = 0; i < 4; ++i) s = m.apply_action(s, actions[i], words.size(), {});
    CHECK(s.stack_size() == 4);
    CHECK(s.open_count() == 2);
    const ParserState r = m.apply_action(s, Action::reduce(), words.size(), {});
    CHECK(r.open_count() == 1);
    CHECK(s.stack_size() == 4);
    if (v == Variant::Full) {
      CHECK(r.stack_size() == 2);
      CHECK(r.top()->kind == StackEntry::Kind::Closed);
      CHECK(corpus::render(*r.top()->subtree) == "(NP the cat)");
    } else {
      CHECK(r.stack_size() == 5);
      CHECK(r.top()->kind == StackEntry::Kind::CloseBracket);
    }
    CHECK(r.log_prob() < s.log_prob());
  }
}

TEST_CASE("states are persistent") {
  const RnngModel m = small_model(Variant::Full);
  const ParserState s0 = m.init_state();
  const ParserState s1 = m.apply_action(s0, Action::nt(0), 3, {});
  const std::vector<double> summary(s1.summary().begin(), s1.summary().end());
  const ParserState a = m.apply_action(s1, Action::gen(0), 3, {});
  const ParserState b = m.apply_action(s1, Action::nt(1), 3, {});
  CHECK(s1.stack_size() == 1);
  CHECK(s1.action_count() == 1);
  CHECK(std::vector<double>(s1.summary().begin(), s1.summary().end()) == summary);
  CHECK(a.words_emitted() == 1);
  CHECK(b.open_count() == 2);
  CHECK(s0.stack_size() == 0);
}

TEST_CASE("invalid actions are rejected") {
  const RnngModel m = small_model(Variant::Full);
  const ParserState s0 = m.init_state();
  CHECK_THROWS_AS(m.apply_action(s0, Action::gen(0), 2, {}), InvalidActionError);
  CHECK_THROWS_AS(m.apply_action(s0, Action::reduce(), 2, {}), InvalidActionError);
  const ParserState s1 = m.apply_action(s0, Action::nt(0), 2, {});
  CHECK_THROWS_AS(m.apply_action(s1, Action::reduce(), 2, {}), InvalidActionError);
  CHECK_THROWS_AS(m.apply_action(s1, Action::nt(999), 2, {}), InvalidActionError);
}

TEST_CASE("oracle loss names the first invalid action") {
  const RnngModel m = small_model(Variant::Full);
  const std::vector<Action> bad = {Action::nt(0), Action::reduce()};
  nn::Graph g;
  try {
    m.oracle_nll(g, bad, 1);
    FAIL("expected an error");
  } catch (const corpus::OracleError& e) {
    CHECK(e.index() == 1);
  }
}

TEST_CASE("composition needs daughters and only exists in the full variant") {
  const RnngModel full = small_model(Variant::Full);
  const RnngModel flat = small_model(Variant::NoComp);
  const std::vector<std::vector<double>> none;
  CHECK_THROWS_AS(full.compose(0, none), nn::EmptyInputError);
  const std::vector<std::vector<double>> one = {std::vector<double>(6, 0.1)};
  CHECK(full.compose(0, one).size() == 6);
  CHECK_THROWS(flat.compose(0, one));
}

TEST_CASE("checkpoints restore the model exactly") {
  const auto path = std::filesystem::temp_directory_path() / "rnng_test_model.json";
  for (Variant v : {Variant::Full, Variant::NoComp}) {
    const RnngModel m = small_model(v, 6);
    m.save(path);
    const RnngModel back = RnngModel::load(path);
    CHECK(back.variant() == v);
    for (const corpus::Tree& t : corpus::generate_toy_treebank(3, 2)) CHECK(back.tree_logprob(t) == m.tree_logprob(t));
  }
  std::filesystem::remove(path);
}

TEST_CASE("training lowers the loss and replay is deterministic") {
  RnngModel m = small_model(Variant::Full);
  const auto trees = corpus::generate_toy_treebank(20, 4);
  const auto examples = prepare_examples(m, trees);
  CHECK(batch_loss(m, examples) == batch_loss(m, examples));
  nn::Adam opt(nn::AdamConfig{0.01});
  const double before = batch_loss(m, examples);
  for (int i = 0; i < 30; ++i) train_step(m, opt, examples);
  CHECK(batch_loss(m, examples) < before);
}

TEST_CASE("finished states rebuild their tree") {
  const RnngModel m = small_model(Variant::NoComp);
  const corpus::Tree t = corpus::parse_bracketed("(S (NP the cat) (VP sleeps (PP on (NP the mat))))");
  const ParserState s = run(m, t);
  CHECK(m.to_tree(s, corpus::yield(t)) == t);
}
