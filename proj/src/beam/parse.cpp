#include "rnng/beam/parse.hpp"

#include <atomic>
#include <thread>

#include "rnng/corpus/vocab.hpp"

namespace rnng::beam {

const char* to_string(SearchStatus s) {
  switch (s) {
    case SearchStatus::Filled: return "filled";
    case SearchStatus::Drained: return "drained";
    case SearchStatus::Capped: return "capped";
    case SearchStatus::Failed: return "failed";
  }
  return "?";
}

model::ParserState complete(const model::RnngModel& m, const model::ParserState& s, std::size_t sentence_length,
                            const Limits& limits) {
  model::ParserState cur = s;
  while (!cur.finished()) {
    const auto succ = m.expand(cur, 0, sentence_length, limits);
    if (succ.size() != 1 || succ.front().action.kind != corpus::ActionKind::REDUCE) {
      throw std::logic_error("completion expected a single forced REDUCE");
    }
    cur = m.advance(cur, succ.front().action, succ.front().log_prob);
  }
  return cur;
}

ParseResult parse_sentence(const model::RnngModel& m, std::span<const std::string> tokens, const BeamConfig& cfg,
                           const Limits& limits) {
  if (tokens.empty()) throw std::invalid_argument("parse_sentence: empty sentence");
  const std::size_t n = tokens.size();
  ParseResult result;
  std::vector<model::ParserState> beam{m.init_state()};
  for (std::size_t i = 0; i < n; ++i) {
    const WordId target = corpus::map_token(tokens[i], m.vocab(), i == 0);
    auto step = advance_word(m, std::span<const model::ParserState>(beam), target, n, i, cfg, limits);
    const bool failed = step.record.status == SearchStatus::Failed;
    if (step.record.exhausted()) ++result.exhausted_words;
    result.records.push_back(std::move(step.record));
    if (failed) throw PartialParseError(i, std::move(result.records));
    beam = std::move(step.beam);
  }

  const model::ParserState* best = nullptr;
  std::vector<model::ParserState> done;
  done.reserve(beam.size());
  for (const auto& s : beam) done.push_back(complete(m, s, n, limits));
  for (const auto& s : done) {
    if (!best || s.log_prob() > best->log_prob()) best = &s;
  }
  result.tree = m.to_tree(*best, tokens);
  result.log_prob = best->log_prob();
  return result;
}

std::vector<SentenceOutcome> parse_corpus(const model::RnngModel& m,
                                          const std::vector<std::vector<std::string>>& sentences,
                                          const BeamConfig& cfg, const Limits& limits, std::size_t threads) {
  cfg.validate();
  std::vector<SentenceOutcome> out(sentences.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < sentences.size(); i = next++) {
      try {
        out[i].result = parse_sentence(m, sentences[i], cfg, limits);
      } catch (const PartialParseError& e) {
        out[i].error = e.what();
        out[i].records = e.records();
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, sentences.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

corpus::Tree fallback_tree(const model::RnngModel& m, std::span<const std::string> tokens) {
  std::vector<corpus::Tree> leaves;
  for (const auto& t : tokens) leaves.push_back(corpus::Tree::leaf(t));
  return corpus::Tree::node(m.vocab().nt(0), std::move(leaves));
}

SweepReport run_beam(const model::RnngModel& m, const std::vector<std::vector<std::string>>& sentences,
                     const std::vector<corpus::Tree>* gold, const BeamConfig& cfg, const Limits& limits,
                     std::size_t threads, const std::set<std::string>& function_words) {
  SweepReport rep;
  rep.k = cfg.k;
  rep.config = cfg;
  const auto outcomes = parse_corpus(m, sentences, cfg, limits, threads);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    const auto& records = o.result ? o.result->records : o.records;
    auto rows = metrics::metric_rows(i, sentences[i], records, function_words);
    rep.rows.insert(rep.rows.end(), rows.begin(), rows.end());
    if (o.result) {
      rep.trees.push_back(o.result->tree);
      rep.exhausted_words += o.result->exhausted_words;
    } else {
      rep.trees.push_back(fallback_tree(m, sentences[i]));
      ++rep.failed_sentences;
    }
  }
  if (gold) rep.f1 = metrics::bracket_f1(*gold, rep.trees);
  return rep;
}

std::vector<SweepReport> beam_sweep(const model::RnngModel& m, const std::vector<std::vector<std::string>>& sentences,
                                    const std::vector<corpus::Tree>* gold, const std::vector<std::size_t>& ks,
                                    const Limits& limits, std::size_t threads, std::size_t max_iterations,
                                    const std::set<std::string>& function_words) {
  if (ks.empty()) throw std::invalid_argument("beam_sweep: no beam sizes");
  std::vector<SweepReport> out;
  for (std::size_t k : ks) {
    BeamConfig cfg = BeamConfig::with_defaults(k);
    cfg.max_iterations = max_iterations;
    out.push_back(run_beam(m, sentences, gold, cfg, limits, threads, function_words));
  }
  return out;
}

}  // namespace rnng::beam
