#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rnng/model/rnng.hpp"
#include "rnng/nn/kernels.hpp"

namespace rnng::beam {

using model::Action;
using model::Limits;
using model::Successor;
using corpus::WordId;

struct BeamConfig {
  std::size_t k = 100;
  std::size_t k_word = 10;
  std::size_t k_ft = 1;
  std::size_t max_iterations = 80;

  /// k_word = k/10 and k_ft = k/100, each at least 1.
  static BeamConfig with_defaults(std::size_t k);
  /// Requires 1 <= k_word <= k, k_ft <= k_word, max_iterations >= 1.
  void validate() const;
};

inline BeamConfig BeamConfig::with_defaults(std::size_t k) {
  BeamConfig c;
  c.k = k;
  c.k_word = std::max<std::size_t>(1, k / 10);
  c.k_ft = std::max<std::size_t>(1, k / 100);
  return c;
}

inline void BeamConfig::validate() const {
  std::string err;
  if (k == 0) err += " k must be >= 1;";
  if (k_word == 0 || k_word > k) err += " word beam must be in [1, k];";
  if (k_ft > k_word) err += " fast-track count must not exceed the word beam;";
  if (max_iterations == 0) err += " iteration cap must be >= 1;";
  if (!err.empty()) throw std::invalid_argument("invalid beam configuration:" + err);
}

enum class SearchStatus {
  Filled,   // nextword reached k
  Drained,  // no structural states left; nextword holds every analysis found
  Capped,   // iteration cap hit before nextword reached k
  Failed,   // no analysis reached the word
};

const char* to_string(SearchStatus s);

/// Trace of one word of Algorithm 1.
struct SearchRecord {
  std::size_t word_index = 0;
  std::size_t iterations = 0;
  std::vector<std::size_t> fringe_sizes;
  std::size_t nextword_size = 0;
  std::size_t fast_tracked = 0;
  double prior_log_mass = 0.0;      // natural log, previous word beam
  double posterior_log_mass = 0.0;  // natural log, returned word beam
  std::vector<double> nextword_log_probs;  // descending
  SearchStatus status = SearchStatus::Filled;

  bool exhausted() const { return status == SearchStatus::Capped || status == SearchStatus::Failed; }
};

template <class M>
concept SearchModel = requires(const M& m, const typename M::State& s, const Action& a, WordId w, std::size_t n,
                               const Limits& limits) {
  { m.expand(s, w, n, limits) } -> std::same_as<std::vector<Successor>>;
  { m.advance(s, a, 0.0) } -> std::same_as<typename M::State>;
  { s.log_prob() } -> std::convertible_to<double>;
};

/// Indices of the k best scores, best first; ties keep insertion order.
inline std::vector<std::size_t> top_k_indices(std::span<const double> scores, std::size_t k) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  if (idx.size() > k) idx.resize(k);
  return idx;
}

template <class State>
std::vector<State> prune_top_k(std::vector<State> states, std::size_t k) {
  std::vector<double> scores;
  scores.reserve(states.size());
  for (const auto& s : states) scores.push_back(s.log_prob());
  std::vector<State> out;
  for (std::size_t i : top_k_indices(scores, k)) out.push_back(std::move(states[i]));
  return out;
}

template <class State>
double log_mass(std::span<const State> states) {
  if (states.empty()) return -std::numeric_limits<double>::infinity();
  std::vector<double> lp;
  lp.reserve(states.size());
  for (const auto& s : states) lp.push_back(s.log_prob());
  return nn::kernels::log_sum_exp(lp);
}

template <class State>
struct WordStep {
  std::vector<State> beam;      // nextword pruned to k_word
  std::vector<State> nextword;  // all of nextword, best first
  std::vector<bool> fast_tracked;  // aligned with nextword
  SearchRecord record;
};

/// One word of word-synchronous beam search with fast-tracking. Each pass
/// expands every state in thisword (GEN restricted to `target`), keeps the k
/// best successors, sends lexical ones to nextword and structural ones back to
/// thisword, and promotes the k_ft best lexical successors that fell below the
/// cut straight into nextword. Passes repeat until nextword holds k analyses.
template <SearchModel M>
WordStep<typename M::State> advance_word(const M& model, std::span<const typename M::State> start, WordId target,
                                         std::size_t sentence_length, std::size_t word_index, const BeamConfig& cfg,
                                         const Limits& limits = {}) {
  using State = typename M::State;
  cfg.validate();
  if (start.empty()) throw std::invalid_argument("advance_word: empty beam");

  WordStep<State> out;
  SearchRecord& rec = out.record;
  rec.word_index = word_index;
  rec.prior_log_mass = log_mass<State>(start);

  struct Entry {
    std::size_t parent;
    Successor succ;
  };
  std::vector<State> thisword(start.begin(), start.end());
  std::vector<State> nextword;
  std::vector<bool> promoted;

  while (nextword.size() < cfg.k && !thisword.empty() && rec.iterations < cfg.max_iterations) {
    std::vector<Entry> fringe;
    for (std::size_t i = 0; i < thisword.size(); ++i) {
      for (auto& s : model.expand(thisword[i], target, sentence_length, limits)) fringe.push_back({i, s});
    }
    ++rec.iterations;
    rec.fringe_sizes.push_back(fringe.size());

    std::vector<double> scores;
    scores.reserve(fringe.size());
    for (const auto& e : fringe) scores.push_back(e.succ.log_prob);
    const std::vector<std::size_t> order = top_k_indices(scores, fringe.size());

    std::vector<State> structural;
    std::size_t promoted_now = 0;
    for (std::size_t r = 0; r < order.size(); ++r) {
      const Entry& e = fringe[order[r]];
      const bool lexical = e.succ.action.kind == corpus::ActionKind::GEN;
      if (r < cfg.k) {
        State next = model.advance(thisword[e.parent], e.succ.action, e.succ.log_prob);
        if (lexical) {
          nextword.push_back(std::move(next));
          promoted.push_back(false);
        } else {
          structural.push_back(std::move(next));
        }
      } else if (lexical && promoted_now < cfg.k_ft) {
        nextword.push_back(model.advance(thisword[e.parent], e.succ.action, e.succ.log_prob));
        promoted.push_back(true);
        ++promoted_now;
        ++rec.fast_tracked;
      }
    }
    thisword = std::move(structural);
  }

  if (nextword.empty()) {
    rec.status = SearchStatus::Failed;
  } else if (nextword.size() >= cfg.k) {
    rec.status = SearchStatus::Filled;
  } else if (thisword.empty()) {
    rec.status = SearchStatus::Drained;
  } else {
    rec.status = SearchStatus::Capped;
  }

  std::vector<double> scores;
  for (const auto& s : nextword) scores.push_back(s.log_prob());
  for (std::size_t i : top_k_indices(scores, nextword.size())) {
    out.nextword.push_back(nextword[i]);
    out.fast_tracked.push_back(promoted[i]);
    rec.nextword_log_probs.push_back(scores[i]);
  }
  rec.nextword_size = out.nextword.size();
  out.beam.assign(out.nextword.begin(), out.nextword.begin() + std::min(cfg.k_word, out.nextword.size()));
  rec.posterior_log_mass = log_mass<State>(out.beam);
  return out;
}

}  // namespace rnng::beam
