#pragma once

#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rnng/beam/search.hpp"
#include "rnng/corpus/tree.hpp"
#include "rnng/metrics/metrics.hpp"
#include "rnng/model/rnng.hpp"

namespace rnng::beam {

struct ParseResult {
  corpus::Tree tree;
  double log_prob = 0.0;
  std::vector<SearchRecord> records;
  std::size_t exhausted_words = 0;
};

/// No analysis survived to `word_index`; `records` ends with the failed word.
class PartialParseError : public std::runtime_error {
 public:
  PartialParseError(std::size_t word_index, std::vector<SearchRecord> records)
      : std::runtime_error("beam search lost every analysis at word " + std::to_string(word_index)),
        word_index_(word_index),
        records_(std::move(records)) {}
  std::size_t word_index() const { return word_index_; }
  const std::vector<SearchRecord>& records() const { return records_; }

 private:
  std::size_t word_index_;
  std::vector<SearchRecord> records_;
};

/// Closes every open constituent of a word-complete state. With the whole
/// sentence generated only REDUCE remains valid, so completion is forced.
model::ParserState complete(const model::RnngModel& m, const model::ParserState& s, std::size_t sentence_length,
                            const Limits& limits = {});

/// Chains advance_word over the sentence from the initial state, completes
/// the final word beam and returns the most probable tree.
ParseResult parse_sentence(const model::RnngModel& m, std::span<const std::string> tokens, const BeamConfig& cfg,
                           const Limits& limits = {});

struct SentenceOutcome {
  std::optional<ParseResult> result;
  std::string error;
  std::vector<SearchRecord> records;  // partial when the parse failed
};

/// Parses every sentence, spreading sentences over `threads` workers. Output
/// order and contents do not depend on the thread count.
std::vector<SentenceOutcome> parse_corpus(const model::RnngModel& m,
                                          const std::vector<std::vector<std::string>>& sentences,
                                          const BeamConfig& cfg, const Limits& limits = {}, std::size_t threads = 1);

struct SweepReport {
  std::size_t k = 0;
  BeamConfig config;
  std::vector<metrics::MetricRow> rows;
  std::vector<corpus::Tree> trees;  // fallback_tree for failed sentences
  std::optional<metrics::BracketScore> f1;
  std::size_t failed_sentences = 0;
  std::size_t exhausted_words = 0;
};

/// A flat tree under the first nonterminal, used where no parse was found.
corpus::Tree fallback_tree(const model::RnngModel& m, std::span<const std::string> tokens);

SweepReport run_beam(const model::RnngModel& m, const std::vector<std::vector<std::string>>& sentences,
                     const std::vector<corpus::Tree>* gold, const BeamConfig& cfg, const Limits& limits = {},
                     std::size_t threads = 1,
                     const std::set<std::string>& function_words = metrics::default_function_words());

/// Runs the corpus at every k with word beam k/10 and fast-track k/100.
std::vector<SweepReport> beam_sweep(const model::RnngModel& m, const std::vector<std::vector<std::string>>& sentences,
                                    const std::vector<corpus::Tree>* gold, const std::vector<std::size_t>& ks,
                                    const Limits& limits = {}, std::size_t threads = 1,
                                    std::size_t max_iterations = BeamConfig{}.max_iterations,
                                    const std::set<std::string>& function_words = metrics::default_function_words());

}  // namespace rnng::beam
