#include "rnng/cli/commands.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "rnng/beam/parse.hpp"
#include "rnng/cli/config.hpp"
#include "rnng/cli/report.hpp"
#include "rnng/corpus/tree.hpp"
#include "rnng/corpus/vocab.hpp"
#include "rnng/erp/design.hpp"
#include "rnng/erp/epochs.hpp"
#include "rnng/erp/regress.hpp"
#include "rnng/erp/roi.hpp"
#include "rnng/lm/lm.hpp"
#include "rnng/metrics/metrics.hpp"
#include "rnng/metrics/table.hpp"
#include "rnng/model/gradchecks.hpp"
#include "rnng/model/training.hpp"
#include "rnng/nn/checkpoint.hpp"

namespace rnng::cli {

namespace fs = std::filesystem;
using metrics::format_double;

namespace {

struct Context {
  std::string command;
  Config cfg{run_schema()};
  fs::path out_dir;
  std::size_t threads = 1;
  std::uint64_t seed = 1;
};

fs::path required_path(const Context& ctx, const std::string& key) {
  const fs::path p = ctx.cfg.get_path(key);
  if (p.empty()) throw ConfigError({ctx.command + " needs " + key});
  return p;
}

fs::path output_path(const Context& ctx, const std::string& key, const std::string& fallback) {
  const fs::path p = ctx.cfg.get_path(key);
  return p.empty() ? ctx.out_dir / fallback : p;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

model::Limits limits_of(const Context& ctx) {
  model::Limits l;
  l.max_open = ctx.cfg.get_size("max_open");
  return l;
}

nn::AdamConfig adam_of(const Context& ctx, const std::string& lr_key) {
  nn::AdamConfig a;
  a.learning_rate = ctx.cfg.get_real(lr_key);
  a.clip_threshold = ctx.cfg.get_real("clip");
  return a;
}

std::set<std::string> function_words_of(const Context& ctx) {
  const fs::path p = ctx.cfg.get_path("function_words");
  if (p.empty()) return metrics::default_function_words();
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::set<std::string> out;
  std::string w;
  while (in >> w) out.insert(w);
  return out;
}

std::vector<corpus::Tree> optional_trees(const Context& ctx, const std::string& key) {
  const fs::path p = ctx.cfg.get_path(key);
  return p.empty() ? std::vector<corpus::Tree>{} : corpus::read_treebank(p);
}

/// Sentences from `input`, or the yields of the gold trees.
std::vector<std::vector<std::string>> sentences_of(const Context& ctx, const std::vector<corpus::Tree>& gold) {
  const fs::path input = ctx.cfg.get_path("input");
  if (!input.empty()) {
    auto s = corpus::read_sentences(input);
    if (!gold.empty() && gold.size() != s.size()) {
      throw std::runtime_error("input has " + std::to_string(s.size()) + " sentences but the gold trees number " +
                               std::to_string(gold.size()));
    }
    return s;
  }
  if (gold.empty()) throw ConfigError({ctx.command + " needs input or gold_trees"});
  std::vector<std::vector<std::string>> s;
  for (const auto& t : gold) s.push_back(corpus::yield(t));
  return s;
}

model::RnngModel load_model(const Context& ctx) {
  model::RnngModel m = model::RnngModel::load(output_path(ctx, "model", "model.ckpt"));
  if (ctx.cfg.explicitly_set("variant") &&
      model::parse_variant(ctx.cfg.get_string("variant")) != m.variant()) {
    throw ConfigError({"variant " + ctx.cfg.get_string("variant") + " does not match the checkpoint (" +
                       model::to_string(m.variant()) + ")"});
  }
  return m;
}

double mean_of(const std::vector<metrics::MetricRow>& rows, const std::function<double(const metrics::MetricRow&)>& f) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (r.exhausted) continue;
    s += f(r);
    ++n;
  }
  return n ? s / static_cast<double>(n) : std::nan("");
}

void write_trees(const fs::path& path, const std::vector<corpus::Tree>& trees) {
  auto out = open_out(path);
  for (const auto& t : trees) out << corpus::render(t) << '\n';
}

// ---------------------------------------------------------------- training

void cmd_train_rnng(const Context& ctx) {
  const auto train = corpus::read_treebank(required_path(ctx, "train_trees"));
  const auto dev = optional_trees(ctx, "dev_trees");
  model::ModelConfig mc;
  mc.variant = model::parse_variant(ctx.cfg.get_string("variant"));
  mc.embedding = ctx.cfg.get_size("embedding");
  mc.hidden = ctx.cfg.get_size("hidden");
  mc.scorer_hidden = ctx.cfg.get_size("scorer_hidden");
  mc.composition_hidden = ctx.cfg.get_size("composition_hidden");
  mc.seed = ctx.seed;
  model::RnngModel m(corpus::build_vocab(train, static_cast<int>(ctx.cfg.get_int("min_count"))), mc);
  spdlog::info("training {} RNNG on {} trees ({} words in vocabulary, {} nonterminals)", model::to_string(mc.variant),
               train.size(), m.vocab().word_count(), m.vocab().nt_count());

  model::TrainConfig tc;
  tc.epochs = ctx.cfg.get_size("epochs");
  tc.batch_size = ctx.cfg.get_size("batch_size");
  tc.seed = ctx.seed;
  tc.dropout = ctx.cfg.get_real("dropout");
  tc.adam = adam_of(ctx, "learning_rate");
  tc.limits = limits_of(ctx);

  auto loss = open_out(ctx.out_dir / "loss.tsv");
  loss << "epoch\ttrain_loss\tdev_action_ppl\n";
  model::train_rnng(m, train, dev, tc, [&](const model::EpochStats& s) {
    loss << s.epoch << '\t' << format_double(s.train_loss) << '\t' << format_double(s.dev_action_ppl) << '\n';
    spdlog::info("epoch {:3d}  loss {:.4f}  dev action ppl {:.4f}", s.epoch, s.train_loss, s.dev_action_ppl);
  });
  const fs::path ckpt = output_path(ctx, "model", "model.ckpt");
  m.save(ckpt);
  auto vocab = open_out(ctx.out_dir / "vocab.tsv");
  m.vocab().write_tsv(vocab);
  spdlog::info("wrote {}", ckpt.string());
}

void cmd_train_lm(const Context& ctx) {
  const auto train_trees = corpus::read_treebank(required_path(ctx, "train_trees"));
  const auto dev_trees = optional_trees(ctx, "dev_trees");
  std::vector<std::vector<std::string>> train, dev;
  for (const auto& t : train_trees) train.push_back(corpus::yield(t));
  for (const auto& t : dev_trees) dev.push_back(corpus::yield(t));

  corpus::Vocab vocab = ctx.cfg.get_path("model").empty()
                            ? corpus::build_vocab(train_trees, static_cast<int>(ctx.cfg.get_int("min_count")))
                            : model::RnngModel::load(ctx.cfg.get_path("model")).vocab();
  lm::LmConfig lc;
  lc.embedding = ctx.cfg.get_size("lm_embedding");
  lc.hidden = ctx.cfg.get_size("lm_hidden");
  lc.seed = ctx.seed;
  lm::LmModel m(std::move(vocab), lc);
  spdlog::info("training LSTM LM (H={}) on {} sentences", lc.hidden, train.size());

  lm::LmTrainConfig tc;
  tc.epochs = ctx.cfg.get_size("lm_epochs");
  tc.batch_size = ctx.cfg.get_size("lm_batch_size");
  tc.seed = ctx.seed;
  tc.dropout = ctx.cfg.get_real("lm_dropout");
  tc.adam = adam_of(ctx, "lm_learning_rate");

  auto loss = open_out(ctx.out_dir / "lm_loss.tsv");
  loss << "epoch\ttrain_loss\tdev_lm_ppl\n";
  lm::train_lm(m, train, dev, tc, [&](const lm::LmEpochStats& s) {
    loss << s.epoch << '\t' << format_double(s.train_loss) << '\t' << format_double(s.dev_perplexity) << '\n';
    spdlog::info("epoch {:3d}  loss {:.4f}  dev LM ppl {:.4f}", s.epoch, s.train_loss, s.dev_perplexity);
  });
  const fs::path ckpt = output_path(ctx, "lm_model", "lm.ckpt");
  m.save(ckpt);
  spdlog::info("wrote {}", ckpt.string());
}

// ---------------------------------------------------------------- parsing

void write_parse_summary(std::ostream& out, const beam::SweepReport& rep, const std::vector<metrics::MetricRow>& rows,
                         std::size_t sentences) {
  out << "k\t" << rep.config.k << '\n';
  out << "word_beam\t" << rep.config.k_word << '\n';
  out << "fast_track\t" << rep.config.k_ft << '\n';
  out << "sentences\t" << sentences << '\n';
  out << "words\t" << rows.size() << '\n';
  out << "failed_sentences\t" << rep.failed_sentences << '\n';
  out << "exhausted_words\t" << rep.exhausted_words << '\n';
  out << "mean_distance\t" << format_double(mean_of(rows, [](const auto& r) { return double(r.distance); })) << '\n';
  out << "mean_surprisal\t" << format_double(mean_of(rows, [](const auto& r) { return r.surprisal; })) << '\n';
  out << "mean_entropy\t" << format_double(mean_of(rows, [](const auto& r) { return r.entropy; })) << '\n';
  if (rep.f1) {
    out << "precision\t" << format_double(rep.f1->precision) << '\n';
    out << "recall\t" << format_double(rep.f1->recall) << '\n';
    out << "f1\t" << format_double(rep.f1->f1) << '\n';
  }
}

void cmd_parse(const Context& ctx) {
  const model::RnngModel m = load_model(ctx);
  const auto gold = optional_trees(ctx, "gold_trees");
  const auto sentences = sentences_of(ctx, gold);

  beam::BeamConfig bc;
  bc.k = ctx.cfg.get_size("beam");
  bc.k_word = ctx.cfg.get_auto("word_beam").value_or(std::max<std::size_t>(1, bc.k / 10));
  bc.k_ft = ctx.cfg.get_auto("fast_track").value_or(std::max<std::size_t>(1, bc.k / 100));
  bc.max_iterations = ctx.cfg.get_size("max_iterations");
  try {
    bc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError({e.what()});
  }
  spdlog::info("parsing {} sentences with k={} word beam={} fast-track={}", sentences.size(), bc.k, bc.k_word, bc.k_ft);

  const auto rep = beam::run_beam(m, sentences, gold.empty() ? nullptr : &gold, bc, limits_of(ctx), ctx.threads,
                                  function_words_of(ctx));
  metrics::write_metrics(output_path(ctx, "emit_metrics", "metrics.tsv"), rep.rows);
  write_trees(output_path(ctx, "emit_trees", "trees.txt"), rep.trees);
  auto summary = open_out(ctx.out_dir / "parse_summary.txt");
  write_parse_summary(summary, rep, rep.rows, sentences.size());
  if (!gold.empty()) {
    summary << "rnng_action_ppl\t" << format_double(metrics::action_perplexity(m, gold, limits_of(ctx))) << '\n';
  }
  if (rep.f1) spdlog::info("bracket F1 {:.2f}", rep.f1->f1);
  spdlog::info("{} failed sentences, {} exhausted words", rep.failed_sentences, rep.exhausted_words);
}

void cmd_sweep(const Context& ctx) {
  const model::RnngModel m = load_model(ctx);
  const auto gold = optional_trees(ctx, "gold_trees");
  const auto sentences = sentences_of(ctx, gold);
  const auto ks = ctx.cfg.get_int_list("sweep_k");
  if (ks.empty()) throw ConfigError({"sweep_k is empty"});
  const auto reports = beam::beam_sweep(m, sentences, gold.empty() ? nullptr : &gold, ks, limits_of(ctx), ctx.threads,
                                        ctx.cfg.get_size("max_iterations"), function_words_of(ctx));
  auto table = open_out(ctx.out_dir / "sweep.tsv");
  table << "k\tword_beam\tfast_track\tf1\tprecision\trecall\tfailed_sentences\texhausted_words\tmean_distance\t"
           "mean_surprisal\tmean_entropy\n";
  for (const auto& rep : reports) {
    const std::string k = std::to_string(rep.k);
    metrics::write_metrics(ctx.out_dir / ("metrics_k" + k + ".tsv"), rep.rows);
    write_trees(ctx.out_dir / ("trees_k" + k + ".txt"), rep.trees);
    auto na = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
    table << rep.k << '\t' << rep.config.k_word << '\t' << rep.config.k_ft << '\t'
          << na(rep.f1 ? std::optional(rep.f1->f1) : std::nullopt) << '\t'
          << na(rep.f1 ? std::optional(rep.f1->precision) : std::nullopt) << '\t'
          << na(rep.f1 ? std::optional(rep.f1->recall) : std::nullopt) << '\t' << rep.failed_sentences << '\t'
          << rep.exhausted_words << '\t'
          << format_double(mean_of(rep.rows, [](const auto& r) { return double(r.distance); })) << '\t'
          << format_double(mean_of(rep.rows, [](const auto& r) { return r.surprisal; })) << '\t'
          << format_double(mean_of(rep.rows, [](const auto& r) { return r.entropy; })) << '\n';
    spdlog::info("k={:4d}  F1 {}  failed {}  exhausted {}", rep.k,
                 rep.f1 ? format_double(std::round(rep.f1->f1 * 100) / 100) : "NA", rep.failed_sentences,
                 rep.exhausted_words);
  }
}

void cmd_lm_surprisal(const Context& ctx) {
  const lm::LmModel m = lm::LmModel::load(output_path(ctx, "lm_model", "lm.ckpt"));
  const auto sentences = corpus::read_sentences(required_path(ctx, "input"));
  const fs::path out_path = ctx.cfg.get_path("lm_out");
  std::ofstream file;
  if (!out_path.empty()) file = open_out(out_path);
  std::ostream& out = out_path.empty() ? std::cout : file;
  for (const auto& s : sentences) {
    const auto bits = lm::lm_surprisal_series(m, s);
    for (std::size_t i = 0; i < s.size(); ++i) out << s[i] << '\t' << format_double(bits[i]) << '\n';
  }
  spdlog::info("LM perplexity {:.4f} over {} sentences", lm::perplexity(m, sentences), sentences.size());
}

void cmd_score_f1(const Context& ctx) {
  const auto gold = corpus::read_treebank(required_path(ctx, "gold_trees"));
  const auto pred = corpus::read_treebank(required_path(ctx, "predicted"));
  if (gold.size() != pred.size()) {
    throw std::runtime_error("gold has " + std::to_string(gold.size()) + " trees but predictions number " +
                             std::to_string(pred.size()));
  }
  const auto total = metrics::bracket_f1(gold, pred);
  auto per = open_out(ctx.out_dir / "f1.tsv");
  per << "sent\tmatched\tgold\tpredicted\tprecision\trecall\tf1\n";
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto s = metrics::score_brackets(gold[i], pred[i]);
    per << i << '\t' << s.matched << '\t' << s.gold << '\t' << s.predicted << '\t' << format_double(s.precision)
        << '\t' << format_double(s.recall) << '\t' << format_double(s.f1) << '\n';
  }
  std::ostringstream text;
  text << "sentences\t" << gold.size() << "\nmatched\t" << total.matched << "\ngold\t" << total.gold
       << "\npredicted\t" << total.predicted << "\nprecision\t" << format_double(total.precision) << "\nrecall\t"
       << format_double(total.recall) << "\nf1\t" << format_double(total.f1) << '\n';
  open_out(ctx.out_dir / "f1_summary.txt") << text.str();
  std::cout << text.str();
}

// ---------------------------------------------------------------- signals

std::string k_label(const Context& ctx, std::size_t i, const fs::path& path) {
  const auto labels = ctx.cfg.get_list("k_labels");
  if (i < labels.size()) return labels[i];
  static const std::regex pattern(R"(_k(\d+))");
  std::smatch m;
  const std::string stem = path.stem().string();
  if (std::regex_search(stem, m, pattern)) return m[1];
  return "-";
}

/// Epochs matched to non-exhausted metric rows by (sent, idx), with the
/// metric columns added to the metadata.
erp::EpochSet join_metrics(const erp::EpochSet& e, const std::vector<metrics::MetricRow>& rows) {
  if (!e.meta.has("sent") || !e.meta.has("idx")) {
    throw std::runtime_error("epoch metadata needs numeric sent and idx columns to join metrics");
  }
  std::map<std::pair<std::size_t, std::size_t>, const metrics::MetricRow*> by_pos;
  for (const auto& r : rows) {
    if (!r.exhausted) by_pos[{r.sent, r.idx}] = &r;
  }
  const auto& sent = e.meta.column("sent");
  const auto& idx = e.meta.column("idx");
  std::vector<std::size_t> keep;
  std::vector<const metrics::MetricRow*> matched;
  for (std::size_t i = 0; i < e.n_epochs; ++i) {
    auto it = by_pos.find({static_cast<std::size_t>(sent[i]), static_cast<std::size_t>(idx[i])});
    if (it == by_pos.end()) continue;
    keep.push_back(i);
    matched.push_back(it->second);
  }
  if (keep.empty()) throw std::runtime_error("no epoch matches a metrics row");
  if (keep.size() < e.n_epochs) spdlog::warn("{} of {} epochs have no usable metrics row", e.n_epochs - keep.size(), e.n_epochs);
  erp::EpochSet out = e.select(keep);
  auto column = [&](const std::function<double(const metrics::MetricRow&)>& f) {
    std::vector<double> v;
    for (const auto* r : matched) v.push_back(f(*r));
    return v;
  };
  out.meta.add_column("distance", column([](const auto& r) { return double(r.distance); }));
  out.meta.add_column("surprisal", column([](const auto& r) { return r.surprisal; }));
  out.meta.add_column("entropy", column([](const auto& r) { return r.entropy; }));
  out.meta.add_column("entropy_delta", column([](const auto& r) { return r.entropy_delta; }));
  return out;
}

void cmd_regress(const Context& ctx) {
  erp::EpochSet all = erp::load_epochs(required_path(ctx, "epoch_bundle"));
  if (ctx.cfg.get_bool("content_only")) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < all.n_epochs; ++i) {
      if (all.meta.content[i]) keep.push_back(i);
    }
    all = all.select(keep);
    spdlog::info("{} content-word epochs", all.n_epochs);
  }
  const auto targets = ctx.cfg.get_list("target");
  const auto controls = ctx.cfg.get_list("controls");
  if (targets.empty()) throw ConfigError({"target is empty"});

  erp::Region region;
  const std::string roi = ctx.cfg.get_string("roi");
  if (roi == "custom") {
    region = {"custom", ctx.cfg.get_list("roi_channels"), ctx.cfg.get_real("roi_from"), ctx.cfg.get_real("roi_to")};
    if (region.channels.empty()) throw ConfigError({"roi custom needs roi_channels"});
  } else {
    try {
      region = erp::roi_preset(roi);
    } catch (const std::invalid_argument& e) {
      throw ConfigError({e.what()});
    }
  }

  erp::ClusterOptions co;
  co.n_perm = ctx.cfg.get_size("n_perm");
  co.threshold_p = ctx.cfg.get_real("threshold_p");
  co.seed = ctx.seed;

  std::vector<std::pair<std::string, erp::EpochSet>> sets;
  const auto tables = ctx.cfg.get_paths("metrics");
  if (tables.empty()) {
    sets.emplace_back("-", all);
  } else {
    for (std::size_t i = 0; i < tables.size(); ++i) {
      sets.emplace_back(k_label(ctx, i, tables[i]), join_metrics(all, metrics::read_metrics(tables[i])));
    }
  }

  auto clusters = open_out(ctx.out_dir / "clusters.tsv");
  clusters << "target\tk\tcluster\tpolarity\tmass\tp\tcells\tchannels\tt_from\tt_to\n";
  auto lrt = open_out(ctx.out_dir / "lrt.tsv");
  lrt << "target\tk\troi\tchi2\tdf\tp\tn\n";
  auto summary = open_out(ctx.out_dir / "regress_summary.txt");
  const std::size_t n_tests = sets.size() * targets.size();
  summary << "n_perm\t" << co.n_perm << "\nthreshold_p\t" << format_double(co.threshold_p) << "\nroi\t" << region.name
          << "\nlrt_tests\t" << n_tests << "\nbonferroni_alpha\t" << format_double(0.05 / double(n_tests)) << '\n';

  for (const auto& [label, e] : sets) {
    for (const auto& target : targets) {
      const erp::DesignMatrix d = erp::build_design(e.meta, target, controls);
      erp::check_rank(d);
      const erp::ClusterTest ct = erp::cluster_permutation_test(e, d, co);
      for (std::size_t c = 0; c < ct.clusters.size(); ++c) {
        const auto& cl = ct.clusters[c];
        std::set<std::size_t> chans;
        std::size_t t_lo = e.n_times, t_hi = 0;
        for (const auto& [ch, t] : cl.members) {
          chans.insert(ch);
          t_lo = std::min(t_lo, t);
          t_hi = std::max(t_hi, t);
        }
        std::string names;
        for (std::size_t ch : chans) names += (names.empty() ? "" : ",") + e.channels[ch];
        clusters << target << '\t' << label << '\t' << c + 1 << '\t' << (cl.polarity > 0 ? "+" : "-") << '\t'
                 << format_double(cl.mass) << '\t' << format_double(cl.p) << '\t' << cl.members.size() << '\t'
                 << names << '\t' << format_double(e.time_of(t_lo)) << '\t' << format_double(e.time_of(t_hi)) << '\n';
      }
      const double best_p = ct.clusters.empty() ? 1.0 : std::min_element(ct.clusters.begin(), ct.clusters.end(),
                                                                          [](const auto& a, const auto& b) {
                                                                            return a.p < b.p;
                                                                          })->p;

      const auto y = erp::roi_average(e, region);
      const erp::DesignMatrix d0 = erp::build_design(e.meta, std::nullopt, controls);
      const auto r = erp::lrt_compare(y, d0, d, e.meta.subject);
      lrt << target << '\t' << label << '\t' << region.name << '\t' << format_double(r.chi2) << '\t' << r.df << '\t'
          << format_double(r.p) << '\t' << r.n << '\n';

      const erp::PointwiseFit fit = erp::fit_pointwise(e, d);
      summary << "residual_ar1[" << target << ",k=" << label << "]\t" << format_double(fit.residual_ar1) << '\n';
      summary << "t_threshold[" << target << ",k=" << label << "]\t" << format_double(ct.t_threshold) << '\n';
      spdlog::info("{} (k={}): {} clusters, best p {:.4f}; {} LRT chi2 {:.3f} p {:.3g}; residual AR(1) {:.3f}", target,
                   label, ct.clusters.size(), best_p, region.name, r.chi2, r.p, fit.residual_ar1);
    }
  }
}

void cmd_synth(const Context& ctx) {
  Config spec_cfg(synth_schema());
  const fs::path spec_path = ctx.cfg.get_path("synth_spec");
  if (!spec_path.empty()) spec_cfg.load_file(spec_path);
  spec_cfg.check();
  erp::SynthSpec spec;
  spec.subjects = spec_cfg.get_size("subjects");
  spec.epochs_per_subject = spec_cfg.get_size("epochs_per_subject");
  spec.n_channels = spec_cfg.get_size("n_channels");
  spec.sample_rate = spec_cfg.get_real("sample_rate");
  spec.t_start = spec_cfg.get_real("t_start");
  spec.t_end = spec_cfg.get_real("t_end");
  spec.noise_sd = spec_cfg.get_real("noise_sd");
  spec.subject_effect_sd = spec_cfg.get_real("subject_effect_sd");
  spec.controls = spec_cfg.get_list("controls");
  spec.effect.predictor = spec_cfg.get_string("predictor");
  spec.effect.channels = spec_cfg.get_list("effect_channels");
  spec.effect.t_from = spec_cfg.get_real("effect_from");
  spec.effect.t_to = spec_cfg.get_real("effect_to");
  spec.effect.amplitude = spec_cfg.get_real("amplitude");
  spec.seed = static_cast<std::uint64_t>(spec_cfg.get_int("seed"));
  const erp::EpochSet e = erp::synth_epochs(spec);
  fs::path stem = ctx.cfg.get_path("synth_out");
  if (stem.is_relative()) stem = ctx.out_dir / stem;
  erp::save_epochs(stem, e);
  open_out(ctx.out_dir / "synth_spec.cfg") << spec_cfg.resolved_text("synth");
  spdlog::info("wrote {} epochs x {} channels x {} samples to {}.bin/.tsv", e.n_epochs, e.n_channels, e.n_times,
               stem.string());
}

void cmd_grad_check(const Context& ctx) {
  const std::size_t n = ctx.cfg.get_size("grad_seeds");
  const double tol = ctx.cfg.get_real("grad_tolerance");
  auto out = open_out(ctx.out_dir / "gradcheck.tsv");
  out << "check\tseed\tinput\thidden\tcoords\tmax_relative_error\tworst_parameter\n";
  std::map<std::string, double> worst;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& c : model::run_gradient_checks(ctx.seed + i)) {
      out << c.name << '\t' << c.seed << '\t' << c.input << '\t' << c.hidden << '\t' << c.result.coords_checked << '\t'
          << format_double(c.result.max_relative_error) << '\t' << c.result.worst_parameter << '\n';
      worst[c.name] = std::max(worst[c.name], c.result.max_relative_error);
    }
  }
  bool ok = true;
  for (const auto& [name, err] : worst) {
    spdlog::info("{:14s} worst relative error {:.3g} over {} seeds", name, err, n);
    ok = ok && err < tol;
  }
  if (!ok) throw std::runtime_error("gradient check exceeded tolerance " + format_double(tol));
}

// ---------------------------------------------------------------- dispatch

struct Flag {
  std::string name;
  std::string key;
  std::string help;
};

struct Command {
  std::string name;
  std::string help;
  std::vector<Flag> flags;
  std::function<void(const Context&)> action;
};

std::vector<Command> commands() {
  const Flag seed{"--seed", "seed", "base seed"};
  const Flag threads{"--threads", "threads", "worker threads (0: all cores)"};
  const Flag log_level{"--log-level", "log_level", "trace|debug|info|warn|error|off"};
  const Flag out_dir{"--out-dir", "out_dir", "output directory"};
  const Flag model{"--model", "model", "RNNG checkpoint"};
  const Flag input{"--input", "input", "tokenized sentences"};
  const Flag gold{"--gold", "gold_trees", "reference trees"};
  const Flag train{"--train", "train_trees", "training trees"};
  const Flag dev{"--dev", "dev_trees", "development trees"};
  const Flag min_count{"--min-count", "min_count", "vocabulary threshold"};
  const Flag max_open{"--max-open", "max_open", "most open constituents"};
  const Flag max_iter{"--max-iterations", "max_iterations", "search passes per word"};
  const Flag fwords{"--function-words", "function_words", "function-word list"};
  auto with_common = [&](std::vector<Flag> f) {
    f.insert(f.end(), {seed, threads, log_level, out_dir});
    return f;
  };
  return {
      {"train-rnng", "train an RNNG on bracketed trees",
       with_common({train, dev, min_count, max_open, model,
                    {"--variant", "variant", "full or no-comp"},
                    {"--epochs", "epochs", "training epochs"},
                    {"--batch-size", "batch_size", "sentences per update"},
                    {"--learning-rate", "learning_rate", "Adam step size"},
                    {"--clip", "clip", "gradient-norm clip"},
                    {"--dropout", "dropout", "dropout rate"},
                    {"--embedding", "embedding", "embedding size"},
                    {"--hidden", "hidden", "stack LSTM size"},
                    {"--scorer-hidden", "scorer_hidden", "scorer hidden size"},
                    {"--composition-hidden", "composition_hidden", "composition size"}}),
       cmd_train_rnng},
      {"train-lm", "train the LSTM language-model baseline",
       with_common({train, dev, min_count,
                    {"--vocab-from", "model", "RNNG checkpoint whose vocabulary to share"},
                    {"--lm-model", "lm_model", "output checkpoint"},
                    {"--epochs", "lm_epochs", "training epochs"},
                    {"--batch-size", "lm_batch_size", "sentences per update"},
                    {"--learning-rate", "lm_learning_rate", "Adam step size"},
                    {"--clip", "clip", "gradient-norm clip"},
                    {"--dropout", "lm_dropout", "dropout rate"},
                    {"--embedding", "lm_embedding", "embedding size"},
                    {"--hidden", "lm_hidden", "LSTM size"}}),
       cmd_train_lm},
      {"parse", "word-synchronous beam search with per-word metrics",
       with_common({model, input, gold, max_open, max_iter, fwords,
                    {"--variant", "variant", "expected model variant"},
                    {"--k", "beam", "action beam"},
                    {"--word-beam", "word_beam", "word beam (auto: k/10)"},
                    {"--fast-track", "fast_track", "fast-track width (auto: k/100)"},
                    {"--emit-metrics", "emit_metrics", "metrics TSV"},
                    {"--emit-trees", "emit_trees", "best trees"}}),
       cmd_parse},
      {"sweep", "parse at several beam sizes",
       with_common({model, input, gold, max_open, max_iter, fwords,
                    {"--variant", "variant", "expected model variant"},
                    {"--k", "sweep_k", "comma-separated action beams"}}),
       cmd_sweep},
      {"lm-surprisal", "per-token LM surprisal in bits",
       with_common({input, {"--lm-model", "lm_model", "LM checkpoint"}, {"--out", "lm_out", "output file"}}),
       cmd_lm_surprisal},
      {"score-f1", "labeled bracket F1",
       with_common({gold, {"--predicted", "predicted", "trees to score"}}), cmd_score_f1},
      {"regress", "pointwise regression, cluster permutation test and ROI likelihood-ratio tests",
       with_common({{"--epochs", "epoch_bundle", "epoch bundle stem"},
                    {"--metrics", "metrics", "comma-separated metrics TSVs"},
                    {"--k-labels", "k_labels", "beam label per metrics TSV"},
                    {"--target", "target", "comma-separated predictors"},
                    {"--controls", "controls", "comma-separated controls"},
                    {"--n-perm", "n_perm", "permutations"},
                    {"--threshold-p", "threshold_p", "cluster-forming level"},
                    {"--roi", "roi", "N400|P600|ANT|custom"},
                    {"--roi-channels", "roi_channels", "custom region channels"},
                    {"--roi-from", "roi_from", "custom region start (s)"},
                    {"--roi-to", "roi_to", "custom region end (s)"},
                    {"--content-only", "content_only", "restrict to content words"}}),
       cmd_regress},
      {"synth", "synthetic epoch bundle from an effect specification",
       with_common({{"--spec", "synth_spec", "effect specification"}, {"--out", "synth_out", "bundle stem"}}),
       cmd_synth},
      {"grad-check", "finite-difference gradient checks",
       with_common({{"--seeds", "grad_seeds", "number of seeds"}, {"--tolerance", "grad_tolerance", "tolerance"}}),
       cmd_grad_check},
  };
}

void configure_logging(const std::string& level) {
  static const std::set<std::string> levels = {"trace", "debug", "info", "warn", "error", "off"};
  if (!levels.count(level)) throw ConfigError({"log_level '" + level + "' is not one of trace, debug, info, warn, error, off"});
  auto logger = std::make_shared<spdlog::logger>("rnng", std::make_shared<spdlog::sinks::stderr_sink_mt>());
  logger->set_pattern("[%H:%M:%S] [%l] %v");
  logger->set_level(spdlog::level::from_str(level));
  spdlog::set_default_logger(logger);
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Recurrent neural network grammars: training, incremental parsing, complexity metrics and "
               "signal regression"};
  app.name("rnng");
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1, 1);

  const auto table = commands();
  std::vector<std::map<std::string, std::string>> values(table.size());
  struct Bound {
    CLI::Option* option;
    std::string flag, key;
  };
  std::vector<std::vector<Bound>> bound(table.size());
  std::vector<std::string> config_files(table.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < table.size(); ++i) {
    CLI::App* sub = app.add_subcommand(table[i].name, table[i].help);
    sub->add_option("--config", config_files[i], "run configuration file");
    for (const auto& f : table[i].flags) {
      bound[i].push_back({sub->add_option(f.name, values[i][f.name], f.help), f.name, f.key});
    }
    subs.push_back(sub);
  }
  std::string report_dir;
  CLI::App* report = app.add_subcommand("report", "summarize a run directory");
  report->add_option("dir", report_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (report->parsed()) {
      configure_logging("info");
      std::cout << pipeline_report(report_dir);
      return 0;
    }
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      Context ctx;
      ctx.command = table[i].name;
      if (!config_files[i].empty()) ctx.cfg.load_file(config_files[i]);
      for (const auto& b : bound[i]) {
        if (b.option->count() > 0) ctx.cfg.set(b.key, values[i][b.flag], b.flag);
      }
      ctx.cfg.check();
      configure_logging(ctx.cfg.get_string("log_level"));
      ctx.seed = static_cast<std::uint64_t>(ctx.cfg.get_int("seed"));
      const std::size_t t = ctx.cfg.get_size("threads");
      ctx.threads = t ? t : std::max(1u, std::thread::hardware_concurrency());
      ctx.out_dir = ctx.cfg.get_path("out_dir");
      if (ctx.out_dir.empty()) ctx.out_dir = ".";
      fs::create_directories(ctx.out_dir);
      ctx.cfg.write_resolved(ctx.out_dir, ctx.command);
      spdlog::debug("{} {}; outputs in {}", version_string(), ctx.command, ctx.out_dir.string());
      table[i].action(ctx);
      return 0;
    }
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const corpus::TreeParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  } catch (const erp::EpochFormatError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  } catch (const nn::CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return 1;
  } catch (const MissingArtifactsError& e) {
    std::cerr << "report error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace rnng::cli
