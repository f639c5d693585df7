#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rnng/beam/parse.hpp"
#include "rnng/beam/search.hpp"
#include "rnng/cli/config.hpp"
#include "rnng/corpus/oracle.hpp"
#include "rnng/corpus/toy.hpp"
#include "rnng/corpus/tree.hpp"
#include "rnng/erp/design.hpp"
#include "rnng/erp/epochs.hpp"
#include "rnng/erp/regress.hpp"
#include "rnng/erp/roi.hpp"
#include "rnng/erp/stats.hpp"
#include "rnng/lm/lm.hpp"
#include "rnng/metrics/metrics.hpp"
#include "rnng/model/gradchecks.hpp"
#include "rnng/model/rnng.hpp"
#include "rnng/model/training.hpp"
#include "rnng/nn/kernels.hpp"
#include "table_model.hpp"

using namespace rnng;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kToyDir = RNNG_TOY_DIR;
const fs::path kBinary = RNNG_BINARY;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("rnng_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// ------------------------------------------------------------ shared model

struct ToyRun {
  cli::Config cfg{cli::run_schema()};
  std::vector<corpus::Tree> train, dev, test;
  std::optional<model::RnngModel> rnng;
  std::vector<model::EpochStats> rnng_stats;
  std::vector<lm::LmEpochStats> lm_stats;
  fs::path checkpoint;
};

ToyRun& toy_run() {
  static ToyRun run = [] {
    ToyRun r;
    r.cfg.load_file(kToyDir / "toy.cfg");
    r.cfg.check();
    r.train = corpus::read_treebank(r.cfg.get_path("train_trees"));
    r.dev = corpus::read_treebank(r.cfg.get_path("dev_trees"));
    r.test = corpus::read_treebank(r.cfg.get_path("gold_trees"));

    model::ModelConfig mc;
    mc.embedding = r.cfg.get_size("embedding");
    mc.hidden = r.cfg.get_size("hidden");
    mc.scorer_hidden = r.cfg.get_size("scorer_hidden");
    mc.composition_hidden = r.cfg.get_size("composition_hidden");
    mc.seed = static_cast<std::uint64_t>(r.cfg.get_int("seed"));
    r.rnng.emplace(corpus::build_vocab(r.train, static_cast<int>(r.cfg.get_int("min_count"))), mc);
    model::TrainConfig tc;
    tc.epochs = r.cfg.get_size("epochs");
    tc.batch_size = r.cfg.get_size("batch_size");
    tc.seed = mc.seed;
    tc.adam.learning_rate = r.cfg.get_real("learning_rate");
    tc.adam.clip_threshold = r.cfg.get_real("clip");
    r.rnng_stats = model::train_rnng(*r.rnng, r.train, r.dev, tc);
    r.checkpoint = work_dir() / "model.ckpt";
    r.rnng->save(r.checkpoint);

    std::vector<std::vector<std::string>> train_s, dev_s;
    for (const auto& t : r.train) train_s.push_back(corpus::yield(t));
    for (const auto& t : r.dev) dev_s.push_back(corpus::yield(t));
    lm::LmModel lm(r.rnng->vocab(), lm::LmConfig{r.cfg.get_size("lm_embedding"), r.cfg.get_size("lm_hidden"), mc.seed});
    lm::LmTrainConfig lc;
    lc.epochs = r.cfg.get_size("lm_epochs");
    lc.batch_size = r.cfg.get_size("lm_batch_size");
    lc.seed = mc.seed;
    lc.adam.learning_rate = r.cfg.get_real("lm_learning_rate");
    r.lm_stats = lm::train_lm(lm, train_s, dev_s, lc);
    return r;
  }();
  return run;
}

// ------------------------------------------------------------ 1

corpus::Tree random_tree(std::mt19937_64& rng, std::size_t depth) {
  static const std::vector<std::string> labels = {"S", "NP", "VP", "PP", "ADJP", "SBAR", "X"};
  static const std::vector<std::string> words = {"alice", "the", "rabbit", "ran", "down", "a", "hole", "(", ")", "'s"};
  std::uniform_int_distribution<std::size_t> label(0, labels.size() - 1), word(0, words.size() - 1), arity(1, 3);
  std::bernoulli_distribution leaf(0.45);
  corpus::Tree t{labels[label(rng)], {}};
  const std::size_t n = arity(rng);
  for (std::size_t i = 0; i < n; ++i) {
    if (depth <= 1 || leaf(rng)) {
      t.children.push_back(corpus::Tree::leaf(words[word(rng)]));
    } else {
      t.children.push_back(random_tree(rng, depth - 1));
    }
  }
  return t;
}

Outcome oracle_round_trip() {
  std::mt19937_64 rng(1);
  std::size_t total = 0, ok = 0, deepest = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    std::uniform_int_distribution<std::size_t> d(1, 6);
    const corpus::Tree t = random_tree(rng, d(rng));
    deepest = std::max(deepest, corpus::depth(t));
    ++total;
    ok += corpus::actions_to_tree(corpus::tree_to_actions(t)) == t;
  }
  std::size_t toy = 0;
  for (const char* name : {"train.trees", "dev.trees", "test.trees"}) {
    for (const auto& t : corpus::read_treebank(kToyDir / name)) {
      ++total;
      ++toy;
      ok += corpus::actions_to_tree(corpus::tree_to_actions(t)) == t;
    }
  }
  return {ok == total && deepest <= 6, std::to_string(ok) + "/" + std::to_string(total) + " trees (" +
                                           std::to_string(toy) + " from the toy treebank), max depth " +
                                           std::to_string(deepest)};
}

// ------------------------------------------------------------ 2

Outcome gradient_fidelity() {
  std::map<std::string, double> worst;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (const auto& c : model::run_gradient_checks(seed)) {
      worst[c.name] = std::max(worst[c.name], c.result.max_relative_error);
    }
  }
  bool pass = worst.size() == 3;
  std::string detail = "worst over 20 seeds:";
  for (const auto& [name, err] : worst) {
    pass = pass && err < 1e-4;
    detail += " " + name + " " + fmt("%.2e", err);
  }
  return {pass, detail};
}

// ------------------------------------------------------------ 3

struct PrefixMass {
  const model::RnngModel& m;
  const std::vector<corpus::WordId>& ids;
  model::Limits limits;
  std::vector<std::vector<double>> log_terms;
  std::size_t states = 0;

  void visit(const model::ParserState& s) {
    ++states;
    const std::size_t i = s.words_emitted();
    const std::size_t n = ids.size();
    const model::ActionMask mask = m.valid_actions(s, false, limits);
    const auto kind = m.score_actions(s, mask);
    if (mask[0]) {
      const auto nt = m.score_nonterminal(s);
      for (corpus::NtId id = 0; id < nt.size(); ++id) {
        const model::Action a = model::Action::nt(id);
        visit(m.advance(s, a, s.log_prob() + kind[0] + nt[id]));
      }
    }
    if (mask[1]) {
      const double lp = s.log_prob() + kind[1] + m.score_word(s)[ids[i]];
      log_terms[i].push_back(lp);
      if (i + 1 < n) visit(m.advance(s, model::Action::gen(ids[i]), lp));
    }
    if (mask[2]) visit(m.advance(s, model::Action::reduce(), s.log_prob() + kind[2]));
  }
};

Outcome brute_force_surprisal() {
  const ToyRun& run = toy_run();
  const model::RnngModel& m = *run.rnng;
  model::Limits limits;
  limits.max_open = 2;
  beam::BeamConfig exhaustive;
  exhaustive.k = 1'000'000'000;
  exhaustive.k_word = exhaustive.k;
  exhaustive.k_ft = 0;
  exhaustive.max_iterations = 1000;

  std::vector<std::vector<std::string>> sentences;
  for (const auto& s : corpus::read_sentences(run.cfg.get_path("input"))) {
    if (s.size() >= 3 && s.size() <= 5 && sentences.size() < 6) sentences.push_back(s);
  }
  double worst = 0.0;
  std::size_t words = 0, states = 0;
  bool drained = true;
  for (const auto& tokens : sentences) {
    const auto ids = corpus::map_sentence(tokens, m.vocab());
    PrefixMass oracle{m, ids, limits, std::vector<std::vector<double>>(ids.size())};
    oracle.visit(m.init_state());
    states += oracle.states;

    std::vector<model::ParserState> start{m.init_state()};
    double prev = 0.0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto step = beam::advance_word(m, std::span<const model::ParserState>(start), ids[i], ids.size(), i,
                                           exhaustive, limits);
      drained = drained && step.record.status == beam::SearchStatus::Drained;
      const double beam_bits = metrics::surprisal(step.record.prior_log_mass, step.record.posterior_log_mass);
      const double mass = nn::kernels::log_sum_exp(oracle.log_terms[i]);
      const double enum_bits = (prev - mass) / std::numbers::ln2;
      worst = std::max(worst, std::abs(beam_bits - enum_bits));
      prev = mass;
      start = step.beam;
      ++words;
    }
  }
  return {worst <= 1e-9 && drained && words > 0,
          std::to_string(sentences.size()) + " sentences, " + std::to_string(words) + " words, " +
              std::to_string(states) + " enumerated states, max |diff| " + fmt("%.2e", worst) + " bits"};
}

// ------------------------------------------------------------ 4

Outcome beam_fuzz() {
  std::mt19937_64 rng(2024);
  std::size_t violations = 0, words = 0;
  std::string first;
  auto violate = [&](const std::string& what) {
    if (!violations++) first = what;
  };
  for (std::size_t trial = 0; trial < 200; ++trial) {
    const auto trees = corpus::generate_toy_treebank(30, 100 + trial, 8);
    std::uniform_int_distribution<std::size_t> dim(2, 10);
    model::ModelConfig mc;
    mc.variant = trial % 2 ? model::Variant::NoComp : model::Variant::Full;
    mc.embedding = dim(rng);
    mc.hidden = dim(rng);
    mc.scorer_hidden = dim(rng);
    mc.composition_hidden = dim(rng);
    mc.seed = rng();
    const model::RnngModel m(corpus::build_vocab(trees, 1), mc);
    const auto tokens = corpus::yield(trees[trial % trees.size()]);
    const auto ids = corpus::map_sentence(tokens, m.vocab());

    std::uniform_int_distribution<std::size_t> kd(2, 40);
    beam::BeamConfig cfg = beam::BeamConfig::with_defaults(kd(rng));
    if (trial % 3 == 0) {
      cfg.k_word = std::uniform_int_distribution<std::size_t>(1, cfg.k)(rng);
      cfg.k_ft = std::uniform_int_distribution<std::size_t>(0, cfg.k_word)(rng);
    }

    std::vector<model::ParserState> start{m.init_state()};
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto step =
          beam::advance_word(m, std::span<const model::ParserState>(start), ids[i], ids.size(), i, cfg);
      const auto& rec = step.record;
      ++words;
      if (rec.status == beam::SearchStatus::Failed) break;
      for (std::size_t j = 0; j < step.nextword.size(); ++j) {
        const auto& s = step.nextword[j];
        const auto last = s.last_action();
        if (s.words_emitted() != i + 1 || !last || last->kind != corpus::ActionKind::GEN || last->id != ids[i]) {
          violate("word synchrony");
        }
        if (step.fast_tracked[j] && (!last || last->kind != corpus::ActionKind::GEN)) violate("fast-track lexical");
      }
      if (rec.status == beam::SearchStatus::Filled && step.nextword.size() < cfg.k) violate("nextword below k");
      if (step.beam.size() > cfg.k_word) violate("beam above k_word");
      if (rec.fast_tracked > cfg.k_ft * rec.iterations) violate("fast-track count");
      if (metrics::distance(rec) < 1) violate("distance");
      double bits = -1.0;
      try {
        bits = metrics::surprisal(rec.prior_log_mass, rec.posterior_log_mass);
      } catch (const metrics::ConsistencyError&) {
      }
      if (!(bits >= 0.0)) violate("surprisal");
      const double h = metrics::entropy(rec.nextword_log_probs);
      if (h < 0.0 || h > std::log2(static_cast<double>(step.nextword.size())) + 1e-9) violate("entropy range");
      start = step.beam;
    }

    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t k : {2, 4, 8, 16, 32, 64}) {
      const std::vector<model::ParserState> init{m.init_state()};
      const auto step = beam::advance_word(m, std::span<const model::ParserState>(init), ids[0], ids.size(), 0,
                                           beam::BeamConfig::with_defaults(k));
      const double mass = beam::log_mass<model::ParserState>(step.nextword);
      if (mass < prev - 1e-12) violate("beam mass not monotone in k");
      prev = mass;
    }
  }
  return {violations == 0, "200 models, " + std::to_string(words) + " words, " + std::to_string(violations) +
                               " violations" + (violations ? " (first: " + first + ")" : "")};
}

// ------------------------------------------------------------ 5

Outcome hand_trace() {
  using testing::TableModel;
  const TableModel m = testing::hand_trace_model();
  const beam::BeamConfig cfg = testing::hand_trace_config();
  const std::vector<TableModel::State> start = {{"", 0.0}};
  const auto w1 = beam::advance_word(m, std::span<const TableModel::State>(start), 0, 2, 0, cfg);
  const auto w2 = beam::advance_word(m, std::span<const TableModel::State>(w1.beam), 0, 2, 1, cfg);

  struct Expect {
    std::size_t iterations;
    std::vector<std::size_t> fringe;
    std::vector<std::string> nextword;
    std::vector<double> probs;
    std::vector<bool> fast_tracked;
    std::string beam;
    double bits;
  };
  const std::vector<Expect> expect = {
      {3, {2, 4, 4}, {"XYw", "Xw", "YXw"}, {0.21, 0.18, 0.12}, {false, true, true}, "XYw", -std::log2(0.21)},
      {2, {2, 2}, {"XYww", "XYwRw"}, {0.084, 0.063}, {false, false}, "XYww", std::log2(2.5)}};
  const std::vector<const beam::WordStep<TableModel::State>*> got = {&w1, &w2};
  bool pass = true;
  double worst = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& g = *got[i];
    const auto& e = expect[i];
    pass = pass && g.record.iterations == e.iterations && g.record.fringe_sizes == e.fringe &&
           g.fast_tracked == e.fast_tracked && g.beam.size() == 1 && g.beam[0].path == e.beam &&
           g.nextword.size() == e.nextword.size() && g.record.status == beam::SearchStatus::Filled;
    for (std::size_t j = 0; pass && j < e.nextword.size(); ++j) {
      pass = g.nextword[j].path == e.nextword[j];
      worst = std::max(worst, std::abs(g.nextword[j].lp - std::log(e.probs[j])));
    }
    worst = std::max(worst, std::abs(metrics::surprisal(g.record.prior_log_mass, g.record.posterior_log_mass) - e.bits));
  }
  return {pass && worst <= 1e-12, "passes 3 then 2, 2 fast-tracked states, max score error " + fmt("%.1e", worst)};
}

// ------------------------------------------------------------ 6

Outcome learning_sanity() {
  const ToyRun& run = toy_run();
  const double a0 = run.rnng_stats.front().dev_action_ppl, a1 = run.rnng_stats.back().dev_action_ppl;
  const double l0 = run.lm_stats.front().dev_perplexity, l1 = run.lm_stats.back().dev_perplexity;
  std::vector<std::vector<std::string>> sentences;
  for (const auto& t : run.test) sentences.push_back(corpus::yield(t));
  const auto rep = beam::run_beam(*run.rnng, sentences, &run.test, beam::BeamConfig::with_defaults(32));
  const double f1 = rep.f1 ? rep.f1->f1 : 0.0;
  const bool pass = a1 <= 0.7 * a0 && l1 <= 0.7 * l0 && f1 >= 90.0 && run.rnng_stats.size() == 51;
  return {pass, "action ppl " + fmt("%.2f", a0) + " -> " + fmt("%.2f", a1) + ", LM ppl " + fmt("%.2f", l0) + " -> " +
                    fmt("%.2f", l1) + ", F1 at k=32 " + fmt("%.2f", f1)};
}

// ------------------------------------------------------------ 7

Outcome f1_harness() {
  struct Case {
    const char* gold;
    const char* predicted;
    std::size_t matched, gold_n, pred_n;
    double f1;
  };
  const std::vector<Case> cases = {
      {"(S (NP a) (VP b))", "(S (NP a) (VP b))", 3, 3, 3, 100.0},
      {"(S (NP a) (VP b))", "(S (NP a) b)", 2, 3, 2, 80.0},
      {"(S (NP a b) c)", "(S a (VP b c))", 1, 2, 2, 50.0},
      {"(S (NP a b) (VP c d))", "(S (X a b) (Y c d))", 1, 3, 3, 100.0 / 3.0},
      {"(S (NP (NP a) b) c)", "(S (NP a b) c)", 2, 3, 2, 80.0},
      {"(S (NP a) (VP b (NP c)))", "(S (NP a) (VP b (NP c)))", 4, 4, 4, 100.0},
  };
  std::size_t ok = 0;
  for (const auto& c : cases) {
    const auto s = metrics::score_brackets(corpus::parse_bracketed(c.gold), corpus::parse_bracketed(c.predicted));
    ok += s.matched == c.matched && s.gold == c.gold_n && s.predicted == c.pred_n && std::abs(s.f1 - c.f1) < 1e-12;
  }
  return {ok == cases.size(), std::to_string(ok) + "/" + std::to_string(cases.size()) + " hand-counted cases"};
}

// ------------------------------------------------------------ 8

bool same(const std::vector<double>& a, const std::vector<double>& b) { return a == b; }

Outcome variant_isolation() {
  const auto trees = corpus::generate_toy_treebank(100, 77, 8);
  const corpus::Vocab vocab = corpus::build_vocab(trees, 1);
  model::ModelConfig mc;
  mc.embedding = 12;
  mc.hidden = 16;
  mc.scorer_hidden = 16;
  mc.composition_hidden = 10;
  mc.seed = 5;
  const model::RnngModel full(vocab, mc);
  mc.variant = model::Variant::NoComp;
  const model::RnngModel flat(vocab, mc);

  std::size_t shared = 0, mismatched_params = 0;
  for (const auto& p : flat.params()) {
    const nn::Parameter* q = full.params().find(p->name);
    if (!q) continue;
    ++shared;
    mismatched_params += q->value.storage() != p->value.storage();
  }

  std::vector<corpus::Tree> cases = trees;
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> nt(0, vocab.nt_count() - 1), word(corpus::kUnknownClasses.size(),
                                                                                vocab.word_count() - 1);
  for (std::size_t i = 0; i < 100; ++i) {
    corpus::Tree t = corpus::Tree::leaf(vocab.word(static_cast<corpus::WordId>(word(rng))));
    const std::size_t levels = 1 + i % 4;
    for (std::size_t l = 0; l < levels; ++l) t = corpus::Tree::node(vocab.nt(static_cast<corpus::NtId>(nt(rng))), {t});
    cases.push_back(t);
  }

  std::size_t compared = 0, differences = 0, algebra = 0;
  for (const auto& t : cases) {
    const auto words = corpus::yield(t);
    const auto actions = full.to_model_actions(corpus::tree_to_actions(t));
    const auto symbols = corpus::bracket_symbols(t);
    model::ParserState a = full.init_state(), b = flat.init_state();
    bool composed = false;
    for (std::size_t i = 0; i < actions.size(); ++i) {
      if (!composed) {
        const bool done = a.words_emitted() == words.size();
        const auto ma = full.valid_actions(a, done, {}), mb = flat.valid_actions(b, done, {});
        ++compared;
        if (ma != mb || full.score_actions(a, ma) != flat.score_actions(b, mb) ||
            !same(full.score_nonterminal(a), flat.score_nonterminal(b)) ||
            !same(full.score_word(a), flat.score_word(b)) ||
            full.action_log_prob(a, actions[i], words.size(), {}) != flat.action_log_prob(b, actions[i], words.size(), {})) {
          ++differences;
        }
      }
      const std::size_t before = a.stack_size();
      std::size_t popped = 0;
      if (actions[i].kind == corpus::ActionKind::REDUCE) {
        for (const auto* e : a.entries()) {
          ++popped;
          if (e->is_open_nonterminal()) break;
        }
        composed = true;
      }
      a = full.apply_action(a, actions[i], words.size(), {});
      b = flat.apply_action(b, actions[i], words.size(), {});
      const std::size_t expect_full = actions[i].kind == corpus::ActionKind::REDUCE ? before - popped + 1 : before + 1;
      algebra += a.stack_size() != expect_full || b.stack_size() != i + 1;
    }
    algebra += !(full.to_tree(a, words) == t) || !(flat.to_tree(b, words) == t) || symbols.size() != actions.size();
  }
  const bool pass = mismatched_params == 0 && shared > 0 && differences == 0 && algebra == 0;
  return {pass, std::to_string(cases.size()) + " trees (100 single-daughter chains), " + std::to_string(compared) +
                    " pre-composition states compared, " + std::to_string(differences) + " differences, " +
                    std::to_string(shared) + " shared parameter blocks identical"};
}

// ------------------------------------------------------------ 9

erp::SynthSpec erp_spec(double amplitude, std::uint64_t seed) {
  erp::SynthSpec s;
  s.subjects = 20;
  s.epochs_per_subject = 100;
  s.n_channels = 16;
  s.sample_rate = 500.0;
  s.t_start = -0.3;
  s.t_end = 1.0;
  s.effect.amplitude = amplitude;
  s.seed = seed;
  return s;
}

Outcome regression_recovery() {
  const std::vector<std::string> controls = {"word_order", "log_freq"};
  std::size_t recovered = 0;
  double min_overlap = 1.0;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    const erp::SynthSpec spec = erp_spec(0.3, 1000 + rep);
    const erp::EpochSet e = erp::synth_epochs(spec);
    erp::ClusterOptions opt;
    opt.n_perm = 500;
    opt.seed = erp::derive_seed(7, rep);
    const auto test = erp::cluster_permutation_test(e, erp::build_design(e.meta, "target", controls), opt);
    const auto [t0, t1] = e.sample_range(spec.effect.t_from, spec.effect.t_to);
    std::set<std::pair<std::size_t, std::size_t>> site;
    for (const auto& name : spec.effect.channels) {
      for (std::size_t t = t0; t < t1; ++t) site.insert({*e.channel_index(name), t});
    }
    double best = 0.0;
    for (const auto& c : test.clusters) {
      if (c.p >= 0.05) continue;
      std::size_t hit = 0;
      for (const auto& cell : c.members) hit += site.count(cell);
      best = std::max(best, static_cast<double>(hit) / static_cast<double>(site.size()));
    }
    recovered += best >= 0.5;
    min_overlap = std::min(min_overlap, best);
  }

  std::size_t false_positives = 0;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    const erp::EpochSet e = erp::synth_epochs(erp_spec(0.0, 5000 + rep));
    erp::ClusterOptions opt;
    opt.n_perm = 200;
    opt.seed = erp::derive_seed(11, rep);
    const auto test = erp::cluster_permutation_test(e, erp::build_design(e.meta, "target", controls), opt);
    bool any = false;
    for (const auto& c : test.clusters) any = any || c.p < 0.05;
    false_positives += any;
  }
  const double fwer = static_cast<double>(false_positives) / 100.0;
  return {recovered >= 18 && fwer >= 0.01 && fwer <= 0.12,
          "recovered " + std::to_string(recovered) + "/20 (min overlap " + fmt("%.2f", min_overlap) +
              "), null family-wise rate " + fmt("%.2f", fwer) + " over 100"};
}

// ------------------------------------------------------------ 10

Outcome lrt_calibration() {
  const std::vector<std::string> controls = {"word_order", "log_freq"};
  auto lrt_p = [&](double amplitude, std::uint64_t seed) {
    erp::SynthSpec spec = erp_spec(amplitude, seed);
    spec.t_start = 0.2;
    spec.t_end = 0.6;
    const erp::EpochSet e = erp::synth_epochs(spec);
    const auto y = erp::roi_average(e, erp::roi_preset("N400"));
    return erp::lrt_compare(y, erp::build_design(e.meta, std::nullopt, controls),
                            erp::build_design(e.meta, "target", controls), e.meta.subject)
        .p;
  };
  std::vector<double> null_p;
  for (std::uint64_t rep = 0; rep < 200; ++rep) null_p.push_back(lrt_p(0.0, 9000 + rep));
  const erp::KsResult ks = erp::ks_uniform(null_p);
  double strong = 0.0;
  for (std::uint64_t rep = 0; rep < 5; ++rep) strong = std::max(strong, lrt_p(0.3, 9500 + rep));
  return {ks.p > 0.01 && strong < 0.002, "null KS D " + fmt("%.3f", ks.d) + " p " + fmt("%.3f", ks.p) +
                                             " over 200; strong predictor max p " + fmt("%.2e", strong) +
                                             " over 5"};
}

// ------------------------------------------------------------ 11

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const ToyRun& run = toy_run();
  std::vector<std::string> outputs;
  for (const char* name : {"parse_a", "parse_b"}) {
    const fs::path out = work_dir() / name;
    const std::string cmd = "\"" + kBinary.string() + "\" parse --config \"" + (kToyDir / "toy.cfg").string() +
                            "\" --model \"" + run.checkpoint.string() + "\" --seed 7 --log-level off --out-dir \"" +
                            out.string() + "\"";
    if (std::system(cmd.c_str()) != 0) return {false, "parse exited with an error"};
    outputs.push_back(slurp(out / "metrics.tsv"));
  }
  const std::size_t lines = static_cast<std::size_t>(std::count(outputs[0].begin(), outputs[0].end(), '\n'));
  return {outputs[0] == outputs[1] && lines > 1,
          std::to_string(outputs[0].size()) + " bytes, " + std::to_string(lines) + " lines, identical"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_s;
    std::function<Outcome()> check;
    bool check_learning = false;
  };
  const std::vector<Criterion> criteria = {
      {"oracle round-trip", 10, oracle_round_trip},
      {"gradient fidelity", 60, gradient_fidelity},
      {"brute-force surprisal equivalence", 300, brute_force_surprisal},
      {"beam invariants under fuzzing", 300, beam_fuzz},
      {"hand-traced search", 10, hand_trace},
      {"learning sanity", 900, learning_sanity, true},
      {"bracket F1 harness", 10, f1_harness},
      {"variant isolation", 60, variant_isolation},
      {"regression recovery", 1200, regression_recovery},
      {"LRT calibration", 600, lrt_calibration},
      {"determinism", 120, determinism},
  };
  const auto warm = Clock::now();
  toy_run();
  const double training_s = std::chrono::duration<double>(Clock::now() - warm).count();

  std::size_t failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (criteria[i].check_learning) secs += training_s;
    const bool in_time = secs < criteria[i].limit_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s %2zu %s: %s [%.1f s%s]\n", pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str(), secs,
                in_time ? "" : ", over time limit");
    std::fflush(stdout);
  }
  std::error_code ec;
  fs::remove_all(work_dir(), ec);
  return failed ? 1 : 0;
}
