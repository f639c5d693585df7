#include "rnng/metrics/metrics.hpp"

#include <cctype>
#include <cmath>
#include <numbers>

#include "rnng/corpus/oracle.hpp"
#include "rnng/nn/kernels.hpp"

namespace rnng::metrics {

std::size_t distance(const beam::SearchRecord& r) { return r.iterations; }

double surprisal(double prior_log_mass, double posterior_log_mass) {
  const double diff = prior_log_mass - posterior_log_mass;
  if (diff < -1e-9) {
    throw ConsistencyError("word beam mass " + std::to_string(posterior_log_mass) + " exceeds prior mass " +
                           std::to_string(prior_log_mass));
  }
  return std::max(0.0, diff) / std::numbers::ln2;
}

double entropy(std::span<const double> log_probs) {
  if (log_probs.empty()) throw std::invalid_argument("entropy of an empty beam");
  if (log_probs.size() == 1) return 0.0;
  const double z = nn::kernels::log_sum_exp(log_probs);
  double h = 0.0;
  for (double lp : log_probs) {
    const double l = lp - z;
    h -= std::exp(l) * l;
  }
  return std::max(0.0, h / std::numbers::ln2);
}

double entropy_delta(double prev, double cur) { return cur - prev; }

const std::set<std::string>& default_function_words() {
  static const std::set<std::string> words = {
      "a",     "an",    "the",   "this",  "that",  "these", "those", "and",   "or",    "but",   "nor",
      "so",    "yet",   "if",    "then",  "than",  "as",    "of",    "in",    "on",    "at",    "to",
      "for",   "from",  "by",    "with",  "about", "into",  "onto",  "over",  "under", "up",    "down",
      "out",   "off",   "near",  "like",  "i",     "me",    "my",    "you",   "your",  "he",    "him",
      "his",   "she",   "her",   "it",    "its",   "we",    "us",    "our",   "they",  "them",  "their",
      "who",   "whom",  "whose", "which", "what",  "there", "here",  "not",   "no",    "be",    "is",
      "am",    "are",   "was",   "were",  "been",  "being", "have",  "has",   "had",   "do",    "does",
      "did",   "will",  "would", "shall", "should", "can",  "could", "may",   "might", "must",  "very",
      "all",   "some",  "any",   "each",  "every", "such",  "own",   "only",  "too",   "just",  "when",
      "where", "while", "how",   "why"};
  return words;
}

bool is_content_word(std::string_view token, const std::set<std::string>& function_words) {
  std::string lower;
  bool any_alnum = false;
  for (unsigned char c : token) {
    lower.push_back(static_cast<char>(std::tolower(c)));
    if (std::isalnum(c)) any_alnum = true;
  }
  return any_alnum && !function_words.count(lower);
}

std::vector<MetricRow> metric_rows(std::size_t sent, std::span<const std::string> tokens,
                                   std::span<const beam::SearchRecord> records,
                                   const std::set<std::string>& function_words) {
  std::vector<MetricRow> rows;
  double prev_entropy = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const beam::SearchRecord& r = records[i];
    MetricRow row;
    row.sent = sent;
    row.idx = i;
    row.token = i < tokens.size() ? tokens[i] : std::string();
    row.distance = distance(r);
    row.exhausted = r.exhausted();
    row.content = is_content_word(row.token, function_words);
    if (!r.nextword_log_probs.empty()) {
      row.surprisal = surprisal(r.prior_log_mass, r.posterior_log_mass);
      row.entropy = entropy(r.nextword_log_probs);
    }
    row.entropy_delta = entropy_delta(prev_entropy, row.entropy);
    prev_entropy = row.entropy;
    rows.push_back(std::move(row));
  }
  return rows;
}

double action_perplexity(const model::RnngModel& model, std::span<const corpus::Tree> trees,
                         const model::Limits& limits) {
  double nll = 0.0;
  std::size_t words = 0;
  for (const auto& t : trees) {
    nll -= model.tree_logprob(t, limits);
    words += corpus::count_terminals(t);
  }
  if (words == 0) throw std::invalid_argument("action_perplexity: no words");
  return std::exp(nll / static_cast<double>(words));
}

}  // namespace rnng::metrics
