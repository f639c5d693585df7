#include <doctest.h>

#include <cmath>

#include "rnng/beam/parse.hpp"
#include "rnng/beam/search.hpp"
#include "rnng/corpus/oracle.hpp"
#include "rnng/corpus/toy.hpp"
#include "table_model.hpp"

using namespace rnng;
using namespace rnng::beam;
using testing::TableModel;

TEST_CASE("top-k keeps ties in insertion order") {
  const std::vector<double> scores = {-1.0, -0.5, -1.0, -0.5, -2.0};
  CHECK(top_k_indices(scores, 3) == std::vector<std::size_t>{1, 3, 0});
  CHECK(top_k_indices(scores, 10).size() == 5);
  std::vector<TableModel::State> states = {{"a", -1.0}, {"b", -0.5}, {"c", -1.0}};
  const auto kept = prune_top_k(states, 2);
  CHECK(kept[0].path == "b");
  CHECK(kept[1].path == "a");
}

TEST_CASE("beam configuration defaults and validation") {
  const BeamConfig c = BeamConfig::with_defaults(250);
  CHECK(c.k_word == 25);
  CHECK(c.k_ft == 2);
  CHECK(BeamConfig::with_defaults(5).k_word == 1);
  CHECK(BeamConfig::with_defaults(5).k_ft == 1);
  BeamConfig bad = c;
  bad.k_word = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.k_ft = 30;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("hand-traced search") {
  const TableModel m = testing::hand_trace_model();
  const BeamConfig cfg = testing::hand_trace_config();
  const std::vector<TableModel::State> start = {{"", 0.0}};
  const auto w1 = advance_word(m, std::span<const TableModel::State>(start), 0, 2, 0, cfg);
  CHECK(w1.record.iterations == 3);
  CHECK(w1.record.fringe_sizes == std::vector<std::size_t>{2, 4, 4});
  CHECK(w1.record.fast_tracked == 2);
  CHECK(w1.record.status == SearchStatus::Filled);
  REQUIRE(w1.nextword.size() == 3);
  CHECK(w1.nextword[0].path == "XYw");
  CHECK(w1.nextword[1].path == "Xw");
  CHECK(w1.nextword[2].path == "YXw");
  CHECK(w1.fast_tracked == std::vector<bool>{false, true, true});
  REQUIRE(w1.beam.size() == 1);
  CHECK(std::abs(w1.beam[0].lp - std::log(0.21)) < 1e-12);
  CHECK(std::abs(w1.record.posterior_log_mass - std::log(0.21)) < 1e-12);

  const auto w2 = advance_word(m, std::span<const TableModel::State>(w1.beam), 0, 2, 1, cfg);
  CHECK(w2.record.iterations == 2);
  CHECK(w2.record.fast_tracked == 0);
  REQUIRE(w2.nextword.size() == 2);
  CHECK(w2.nextword[0].path == "XYww");
  CHECK(w2.nextword[1].path == "XYwRw");
  CHECK(std::abs(w2.record.nextword_log_probs[1] - std::log(0.063)) < 1e-12);
}

TEST_CASE("search without lexical successors fails") {
  TableModel m;
  m.table[""] = {{'X', 1.0}};
  const std::vector<TableModel::State> start = {{"", 0.0}};
  const auto w = advance_word(m, std::span<const TableModel::State>(start), 0, 1, 0, testing::hand_trace_config());
  CHECK(w.record.status == SearchStatus::Failed);
  CHECK(w.record.exhausted());
}

TEST_CASE("search stops at the iteration cap") {
  TableModel m;
  m.table[""] = {{'X', 0.9}, {'w', 0.1}};
  m.table["X"] = {{'X', 0.9}, {'w', 0.1}};
  m.table["XX"] = {{'X', 0.9}, {'w', 0.1}};
  BeamConfig cfg = testing::hand_trace_config();
  cfg.k = 5;
  cfg.max_iterations = 2;
  const std::vector<TableModel::State> start = {{"", 0.0}};
  const auto w = advance_word(m, std::span<const TableModel::State>(start), 0, 1, 0, cfg);
  CHECK(w.record.status == SearchStatus::Capped);
  CHECK(w.record.iterations == 2);
  CHECK(w.nextword.size() == 2);
}

TEST_CASE("parse returns a tree over the input words") {
  const auto trees = corpus::generate_toy_treebank(30, 3);
  model::ModelConfig cfg;
  cfg.embedding = 6;
  cfg.hidden = 8;
  cfg.scorer_hidden = 8;
  cfg.composition_hidden = 5;
  const model::RnngModel m(corpus::build_vocab(trees, 1), cfg);
  const auto words = corpus::yield(trees[0]);
  const ParseResult r = parse_sentence(m, words, BeamConfig::with_defaults(20));
  CHECK(corpus::yield(r.tree) == words);
  CHECK(r.records.size() == words.size());
  CHECK(r.log_prob <= 0.0);

  std::vector<std::vector<std::string>> sentences;
  for (std::size_t i = 0; i < 6; ++i) sentences.push_back(corpus::yield(trees[i]));
  const auto one = parse_corpus(m, sentences, BeamConfig::with_defaults(20), {}, 1);
  const auto three = parse_corpus(m, sentences, BeamConfig::with_defaults(20), {}, 3);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    REQUIRE(one[i].result);
    REQUIRE(three[i].result);
    CHECK(one[i].result->log_prob == three[i].result->log_prob);
    CHECK(one[i].result->tree == three[i].result->tree);
  }
}

TEST_CASE("completion closes every open constituent") {
  const auto trees = corpus::generate_toy_treebank(10, 3);
  const model::RnngModel m(corpus::build_vocab(trees, 1), model::ModelConfig{model::Variant::Full, 4, 4, 4, 4, 2});
  const auto t = corpus::parse_bracketed("(S (NP the cat) (VP sleeps))");
  const auto actions = m.to_model_actions(corpus::tree_to_actions(t));
  model::ParserState s = m.init_state();
  for (std::size_t i = 0; i < 7; ++i) s = m.apply_action(s, actions[i], 3, {});
  CHECK(s.open_count() == 2);
  const model::ParserState done = complete(m, s, 3);
  CHECK(done.finished());
  CHECK(m.to_tree(done, corpus::yield(t)) == t);
}
