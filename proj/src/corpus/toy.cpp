#include "rnng/corpus/toy.hpp"

#include <array>
#include <random>

namespace rnng::corpus {

namespace {

constexpr std::array kDeterminers = {"the", "a"};
constexpr std::array kNouns = {"cat", "dog", "queen", "rabbit", "hatter"};
constexpr std::array kNames = {"alice", "bill"};
constexpr std::array kAdjectives = {"hungry", "small", "curious"};
constexpr std::array kTransitive = {"sees", "chases", "follows", "meets"};
constexpr std::array kPrepositions = {"with", "near"};

class ToySampler {
 public:
  explicit ToySampler(std::uint64_t seed) : rng_(seed) {}

  Tree sentence() { return Tree::node("S", {noun_phrase(), verb_phrase()}); }

 private:
  template <std::size_t N>
  Tree pick(const std::array<const char*, N>& words) {
    std::uniform_int_distribution<std::size_t> d(0, N - 1);
    return Tree::leaf(words[d(rng_)]);
  }

  double coin() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }

  Tree adjective_phrase() {
    if (coin() < 0.75) return Tree::node("ADJP", {pick(kAdjectives)});
    return Tree::node("ADJP", {Tree::leaf("very"), pick(kAdjectives)});
  }

  Tree noun_phrase() {
    const double r = coin();
    if (r < 0.5) return Tree::node("NP", {pick(kDeterminers), pick(kNouns)});
    if (r < 0.75) return Tree::node("NP", {pick(kDeterminers), adjective_phrase(), pick(kNouns)});
    return Tree::node("NP", {pick(kNames)});
  }

  Tree prepositional_phrase() { return Tree::node("PP", {pick(kPrepositions), noun_phrase()}); }

  Tree verb_phrase() {
    const double r = coin();
    if (r < 0.55) return Tree::node("VP", {pick(kTransitive), noun_phrase()});
    if (r < 0.75) return Tree::node("VP", {pick(kTransitive), noun_phrase(), prepositional_phrase()});
    if (r < 0.9) return Tree::node("VP", {Tree::leaf("sleeps")});
    return Tree::node("VP", {Tree::leaf("sleeps"), prepositional_phrase()});
  }

  std::mt19937_64 rng_;
};

}  // namespace

std::vector<Tree> generate_toy_treebank(std::size_t n, std::uint64_t seed, std::size_t max_words) {
  ToySampler sampler(seed);
  std::vector<Tree> out;
  while (out.size() < n) {
    Tree t = sampler.sentence();
    if (count_terminals(t) <= max_words) out.push_back(std::move(t));
  }
  return out;
}

}  // namespace rnng::corpus
