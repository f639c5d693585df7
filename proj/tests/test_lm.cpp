#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "rnng/corpus/toy.hpp"
#include "rnng/lm/lm.hpp"

using namespace rnng;
using namespace rnng::lm;

namespace {

LmModel small_lm(std::uint64_t seed = 2) {
  return LmModel(corpus::build_vocab(corpus::generate_toy_treebank(40, seed), 1), LmConfig{8, 12, seed});
}

std::vector<std::vector<std::string>> sentences(std::size_t n, std::uint64_t seed) {
  std::vector<std::vector<std::string>> out;
  for (const auto& t : corpus::generate_toy_treebank(n, seed)) out.push_back(corpus::yield(t));
  return out;
}

}  // namespace

TEST_CASE("end marker is predicted and the distribution normalizes") {
  const LmModel m = small_lm();
  const auto s = sentences(1, 5).front();
  const auto ids = m.encode(s);
  const auto lp = m.token_log_probs(ids);
  CHECK(lp.size() == s.size() + 1);
  CHECK(m.output_size() == m.vocab().word_count() + 1);
  nn::Graph g;
  double total = 0.0;
  for (double v : lp) total -= v;
  CHECK(g.scalar(m.sentence_nll(g, ids)) == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("perplexity counts end markers") {
  const LmModel m = small_lm();
  const auto corpus = sentences(4, 6);
  double nll = 0.0;
  std::size_t n = 0;
  for (const auto& s : corpus) {
    for (double v : m.token_log_probs(m.encode(s))) {
      nll -= v;
      ++n;
    }
    CHECK(n > 0);
  }
  CHECK(perplexity(m, corpus) == doctest::Approx(std::exp(nll / static_cast<double>(n))).epsilon(1e-12));
  std::size_t words = 0;
  for (const auto& s : corpus) words += s.size();
  CHECK(n == words + corpus.size());
}

TEST_CASE("surprisal is in bits") {
  const LmModel m = small_lm();
  const auto s = sentences(1, 7).front();
  const auto lp = m.token_log_probs(m.encode(s));
  const auto bits = lm_surprisal_series(m, s);
  REQUIRE(bits.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(bits[i] == doctest::Approx(-lp[i] / std::numbers::ln2));
}

TEST_CASE("ids outside the vocabulary are rejected") {
  const LmModel m = small_lm();
  const std::vector<WordId> ids = {0, static_cast<WordId>(m.vocab().word_count())};
  CHECK_THROWS_AS(m.token_log_probs(ids), std::out_of_range);
  nn::Graph g;
  CHECK_THROWS_AS(m.sentence_nll(g, ids), std::out_of_range);
}

TEST_CASE("unseen words go through the unknown classes") {
  const LmModel m = small_lm();
  const std::vector<std::string> s = {"Jabberwocky", "burbled"};
  CHECK(lm_surprisal_series(m, s).size() == 2);
}

TEST_CASE("training lowers perplexity and checkpoints restore it") {
  LmModel m = small_lm();
  const auto train = sentences(40, 2);
  LmTrainConfig cfg;
  cfg.epochs = 5;
  cfg.adam.learning_rate = 0.01;
  const auto stats = train_lm(m, train, {}, cfg);
  REQUIRE(stats.size() == 6);
  CHECK(stats.back().dev_perplexity < stats.front().dev_perplexity);
  const auto path = std::filesystem::temp_directory_path() / "rnng_test_lm.json";
  m.save(path);
  const LmModel back = LmModel::load(path);
  CHECK(perplexity(back, train) == perplexity(m, train));
  std::filesystem::remove(path);
}
