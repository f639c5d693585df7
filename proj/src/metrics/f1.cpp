#include <map>

#include "rnng/metrics/metrics.hpp"

namespace rnng::metrics {

namespace {

using Span = std::tuple<std::string, std::size_t, std::size_t>;

std::size_t collect(const corpus::Tree& t, std::size_t start, std::vector<Span>& out) {
  if (t.is_terminal()) return start + 1;
  std::size_t end = start;
  for (const auto& c : t.children) end = collect(c, end, out);
  out.emplace_back(t.label, start, end);
  return end;
}

void finish(BracketScore& s) {
  s.precision = s.predicted ? 100.0 * static_cast<double>(s.matched) / static_cast<double>(s.predicted) : 0.0;
  s.recall = s.gold ? 100.0 * static_cast<double>(s.matched) / static_cast<double>(s.gold) : 0.0;
  s.f1 = (s.precision + s.recall) > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
}

void accumulate(BracketScore& into, const corpus::Tree& gold, const corpus::Tree& predicted) {
  const auto g = labeled_spans(gold);
  const auto p = labeled_spans(predicted);
  std::map<Span, std::size_t> remaining;
  for (const auto& s : g) ++remaining[s];
  for (const auto& s : p) {
    auto it = remaining.find(s);
    if (it != remaining.end() && it->second > 0) {
      --it->second;
      ++into.matched;
    }
  }
  into.gold += g.size();
  into.predicted += p.size();
}

}  // namespace

std::vector<Span> labeled_spans(const corpus::Tree& t) {
  std::vector<Span> out;
  collect(t, 0, out);
  return out;
}

BracketScore score_brackets(const corpus::Tree& gold, const corpus::Tree& predicted) {
  return bracket_f1(std::span(&gold, 1), std::span(&predicted, 1));
}

BracketScore bracket_f1(std::span<const corpus::Tree> gold, std::span<const corpus::Tree> predicted) {
  if (gold.size() != predicted.size()) {
    throw std::invalid_argument("bracket_f1: " + std::to_string(gold.size()) + " gold trees but " +
                                std::to_string(predicted.size()) + " predicted");
  }
  BracketScore s;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (corpus::yield(gold[i]) != corpus::yield(predicted[i])) {
      throw std::invalid_argument("bracket_f1: yield mismatch in sentence " + std::to_string(i));
    }
    accumulate(s, gold[i], predicted[i]);
  }
  finish(s);
  return s;
}

}  // namespace rnng::metrics
