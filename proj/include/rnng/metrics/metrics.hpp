#pragma once

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "rnng/beam/search.hpp"
#include "rnng/corpus/tree.hpp"
#include "rnng/model/rnng.hpp"

namespace rnng::metrics {

/// Per-word complexity metrics. Information values are in bits. The entropy
/// before the first word of a sentence is taken to be 0, so the first
/// entropy_delta equals the first entropy.
struct MetricRow {
  std::size_t sent = 0;
  std::size_t idx = 0;
  std::string token;
  std::size_t distance = 0;
  double surprisal = 0.0;
  double entropy = 0.0;
  double entropy_delta = 0.0;
  bool content = false;
  bool exhausted = false;

  bool operator==(const MetricRow&) const = default;
};

class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Passes of the search loop needed to reach the word.
std::size_t distance(const beam::SearchRecord& r);

/// (prior - posterior) / ln 2 for natural-log beam masses. Throws when the
/// posterior exceeds the prior by more than rounding noise.
double surprisal(double prior_log_mass, double posterior_log_mass);

/// Shannon entropy in bits of the renormalized distribution over `log_probs`.
double entropy(std::span<const double> log_probs);

double entropy_delta(double prev, double cur);

const std::set<std::string>& default_function_words();
bool is_content_word(std::string_view token, const std::set<std::string>& function_words);

std::vector<MetricRow> metric_rows(std::size_t sent, std::span<const std::string> tokens,
                                   std::span<const beam::SearchRecord> records,
                                   const std::set<std::string>& function_words = default_function_words());

struct BracketScore {
  std::size_t matched = 0;
  std::size_t gold = 0;
  std::size_t predicted = 0;
  double precision = 0.0;  // percent
  double recall = 0.0;
  double f1 = 0.0;
};

/// Labeled spans (label, start, end) of every nonterminal, root included.
std::vector<std::tuple<std::string, std::size_t, std::size_t>> labeled_spans(const corpus::Tree& t);

BracketScore score_brackets(const corpus::Tree& gold, const corpus::Tree& predicted);

/// Micro-averaged labeled bracket scores with multiplicity. Throws naming the
/// first sentence whose yields differ.
BracketScore bracket_f1(std::span<const corpus::Tree> gold, std::span<const corpus::Tree> predicted);

/// exp(total action NLL / word count) over the gold derivations.
double action_perplexity(const model::RnngModel& model, std::span<const corpus::Tree> trees,
                         const model::Limits& limits = {});

}  // namespace rnng::metrics
