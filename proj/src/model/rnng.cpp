#include "rnng/model/rnng.hpp"

#include <algorithm>
#include <cstdio>

#include "rnng/nn/checkpoint.hpp"
#include "rnng/nn/kernels.hpp"

namespace rnng::model {

const char* to_string(Variant v) { return v == Variant::Full ? "full" : "no-comp"; }

Variant parse_variant(const std::string& s) {
  if (s == "full") return Variant::Full;
  if (s == "no-comp" || s == "nocomp") return Variant::NoComp;
  throw std::invalid_argument("unknown variant '" + s + "' (expected full or no-comp)");
}

ActionMask valid_kinds(const DerivationView& view, bool sentence_done, const Limits& limits) {
  const bool finished = view.started && view.open_count == 0;
  ActionMask mask{};
  mask[kind_index(ActionKind::NT)] = !finished && !sentence_done && view.open_count < limits.max_open;
  mask[kind_index(ActionKind::GEN)] = view.open_count >= 1 && !sentence_done;
  mask[kind_index(ActionKind::REDUCE)] =
      view.open_count >= 1 && !view.top_is_open_nt &&
      (view.open_count > 1 || sentence_done || limits.allow_early_root_close);
  return mask;
}

std::vector<const StackEntry*> ParserState::entries() const {
  std::vector<const StackEntry*> out;
  for (const StackNode* n = stack_.get(); n && n->depth > 0; n = n->below.get()) out.push_back(&n->entry);
  return out;
}

std::vector<Action> ParserState::actions() const {
  std::vector<Action> out;
  for (const HistoryNode* n = history_.get(); n; n = n->prev.get()) out.push_back(n->action);
  std::reverse(out.begin(), out.end());
  return out;
}

std::optional<Action> ParserState::last_action() const {
  if (!history_) return std::nullopt;
  return history_->action;
}

DerivationView ParserState::view() const {
  return {open_count_, open_ && open_->depth == stack_->depth, stack_->depth > 0};
}

namespace {

std::vector<double> row_of(const nn::Parameter& p, std::size_t row) {
  const std::size_t cols = p.value.cols();
  auto src = p.value.values().subspan(row * cols, cols);
  return {src.begin(), src.end()};
}

std::vector<std::size_t> allowed_indices(const ActionMask& mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(i);
  }
  return out;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

RnngModel::RnngModel(corpus::Vocab vocab, ModelConfig config) : vocab_(std::move(vocab)), config_(config) {
  if (vocab_.nt_count() == 0) throw std::invalid_argument("RNNG needs at least one nonterminal");
  const std::size_t d = config_.embedding, h = config_.hidden, s = config_.scorer_hidden;
  // Parameters shared by both variants are drawn first from their own stream, so
  // full and no-comp models with one seed agree on every shared weight.
  std::mt19937_64 rng(config_.seed);
  params_.add_uniform("word_embedding", {vocab_.word_count(), d}, nn::kInitScale, rng);
  params_.add_uniform("nt_embedding", {vocab_.nt_count(), d}, nn::kInitScale, rng);
  params_.add_uniform("stack_guard", {d}, nn::kInitScale, rng);
  nn::RnnCellParams::create(params_, "stack_lstm", d, h, rng);
  nn::MlpParams::create(params_, "action_head", {h, s, 3}, rng);
  nn::MlpParams::create(params_, "nt_head", {h, s, vocab_.nt_count()}, rng);
  nn::MlpParams::create(params_, "word_head", {h, s, vocab_.word_count()}, rng);

  std::mt19937_64 variant_rng(config_.seed ^ 0x5bd1e9955bd1e995ULL);
  if (config_.variant == Variant::Full) {
    const std::size_t c = config_.composition_hidden;
    nn::RnnCellParams::create(params_, "compose_fwd", d, c, variant_rng);
    nn::RnnCellParams::create(params_, "compose_bwd", d, c, variant_rng);
    nn::MlpParams::create(params_, "compose_proj", {2 * c, d}, variant_rng, nn::Activation::Tanh);
  } else {
    params_.add_uniform("close_embedding", {vocab_.nt_count(), d}, nn::kInitScale, variant_rng);
  }
  bind();
}

void RnngModel::bind() {
  word_embedding_ = &params_.get("word_embedding");
  nt_embedding_ = &params_.get("nt_embedding");
  stack_guard_ = &params_.get("stack_guard");
  stack_cell_ = nn::RnnCellParams::bind(params_, "stack_lstm");
  heads_.action = nn::MlpParams::bind(params_, "action_head", 2);
  heads_.nonterminal = nn::MlpParams::bind(params_, "nt_head", 2);
  heads_.word = nn::MlpParams::bind(params_, "word_head", 2);
  if (config_.variant == Variant::Full) {
    comp_fwd_ = nn::RnnCellParams::bind(params_, "compose_fwd");
    comp_bwd_ = nn::RnnCellParams::bind(params_, "compose_bwd");
    comp_proj_ = nn::MlpParams::bind(params_, "compose_proj", 1, nn::Activation::Tanh);
  } else {
    close_embedding_ = &params_.get("close_embedding");
  }
}

void RnngModel::save(const std::filesystem::path& path) const {
  nlohmann::json meta = {{"model", "rnng"},
                         {"variant", to_string(config_.variant)},
                         {"embedding", config_.embedding},
                         {"hidden", config_.hidden},
                         {"scorer_hidden", config_.scorer_hidden},
                         {"composition_hidden", config_.composition_hidden},
                         {"seed", config_.seed},
                         {"vocab_hash", hex64(vocab_.hash())},
                         {"vocab", vocab_.to_json()}};
  nn::save_checkpoint(path, params_, meta);
}

RnngModel RnngModel::load(const std::filesystem::path& path) {
  nn::Checkpoint ckpt = nn::load_checkpoint(path);
  const auto& meta = ckpt.metadata;
  if (meta.value("model", "") != "rnng") throw nn::CheckpointError(path.string() + " is not an RNNG checkpoint");
  corpus::Vocab vocab = corpus::Vocab::from_json(meta.at("vocab"));
  if (hex64(vocab.hash()) != meta.value("vocab_hash", "")) {
    throw nn::CheckpointError("vocabulary hash mismatch in " + path.string());
  }
  ModelConfig cfg;
  cfg.variant = parse_variant(meta.at("variant").get<std::string>());
  cfg.embedding = meta.at("embedding").get<std::size_t>();
  cfg.hidden = meta.at("hidden").get<std::size_t>();
  cfg.scorer_hidden = meta.at("scorer_hidden").get<std::size_t>();
  cfg.composition_hidden = meta.at("composition_hidden").get<std::size_t>();
  cfg.seed = meta.at("seed").get<std::uint64_t>();
  RnngModel model(std::move(vocab), cfg);
  nn::restore_parameters(model.params_, ckpt);
  return model;
}

ParserState RnngModel::init_state() const {
  const std::size_t h = config_.hidden;
  auto guard = std::make_shared<ParserState::StackNode>();
  const std::vector<double> zeros(h, 0.0);
  nn::LstmOutput out = nn::lstm_step(stack_guard_->value.values(), zeros, zeros, stack_cell_);
  guard->h = std::move(out.h);
  guard->c = std::move(out.c);
  guard->depth = 0;
  ParserState s;
  s.stack_ = std::move(guard);
  return s;
}

ActionMask RnngModel::valid_actions(const ParserState& s, bool sentence_done, const Limits& limits) const {
  return valid_kinds(s.view(), sentence_done, limits);
}

std::array<double, 3> RnngModel::score_actions(const ParserState& s, const ActionMask& mask) const {
  const std::vector<double> logits = nn::mlp_forward(s.summary(), heads_.action);
  const std::vector<std::size_t> allowed = allowed_indices(mask);
  const std::vector<double> lp = nn::kernels::log_softmax(logits, allowed);
  return {lp[0], lp[1], lp[2]};
}

std::vector<double> RnngModel::score_nonterminal(const ParserState& s) const {
  return nn::kernels::log_softmax(nn::mlp_forward(s.summary(), heads_.nonterminal));
}

std::vector<double> RnngModel::score_word(const ParserState& s) const {
  return nn::kernels::log_softmax(nn::mlp_forward(s.summary(), heads_.word));
}

double RnngModel::action_log_prob(const ParserState& s, const Action& a, std::size_t sentence_length,
                                  const Limits& limits) const {
  const ActionMask mask = valid_actions(s, s.words_emitted() >= sentence_length, limits);
  if (!mask[kind_index(a.kind)]) {
    throw InvalidActionError(std::string("action ") + corpus::to_string(a.kind) + " is not valid in this state");
  }
  const double kind_lp = score_actions(s, mask)[kind_index(a.kind)];
  switch (a.kind) {
    case ActionKind::NT:
      if (a.id >= vocab_.nt_count()) throw InvalidActionError("nonterminal id out of range");
      return kind_lp + score_nonterminal(s)[a.id];
    case ActionKind::GEN:
      if (a.id >= vocab_.word_count()) throw InvalidActionError("word id out of range");
      return kind_lp + score_word(s)[a.id];
    case ActionKind::REDUCE:
      return kind_lp;
  }
  return kind_lp;
}

ParserState RnngModel::apply_action(const ParserState& s, const Action& a, std::size_t sentence_length,
                                    const Limits& limits) const {
  const double lp = action_log_prob(s, a, sentence_length, limits);
  return advance(s, a, s.log_prob() + lp);
}

ParserState RnngModel::push(const ParserState& s, StackEntry entry) const {
  auto node = std::make_shared<ParserState::StackNode>();
  nn::LstmOutput out = nn::lstm_step(entry.embedding, s.stack_->h, s.stack_->c, stack_cell_);
  node->entry = std::move(entry);
  node->h = std::move(out.h);
  node->c = std::move(out.c);
  node->below = s.stack_;
  node->depth = s.stack_->depth + 1;
  ParserState next = s;
  next.stack_ = std::move(node);
  return next;
}

ParserState RnngModel::advance(const ParserState& s, const Action& a, double new_log_prob) const {
  ParserState next;
  switch (a.kind) {
    case ActionKind::NT: {
      StackEntry e{StackEntry::Kind::OpenNt, a.id, row_of(*nt_embedding_, a.id), nullptr};
      next = push(s, std::move(e));
      next.open_ = std::make_shared<ParserState::OpenFrame>(ParserState::OpenFrame{a.id, next.stack_->depth, s.open_});
      ++next.open_count_;
      break;
    }
    case ActionKind::GEN: {
      StackEntry e{StackEntry::Kind::Terminal, a.id, row_of(*word_embedding_, a.id),
                   std::make_shared<const corpus::Tree>(corpus::Tree::leaf(vocab_.word(a.id)))};
      next = push(s, std::move(e));
      ++next.words_;
      break;
    }
    case ActionKind::REDUCE: {
      if (!s.open_) throw InvalidActionError("REDUCE with no open constituent");
      const ParserState::OpenFrame& frame = *s.open_;
      if (frame.depth == s.stack_->depth) throw InvalidActionError("REDUCE of an empty constituent");
      if (config_.variant == Variant::Full) {
        std::vector<const ParserState::StackNode*> daughters;
        const ParserState::StackNode* n = s.stack_.get();
        while (n->depth > frame.depth) {
          daughters.push_back(n);
          n = n->below.get();
        }
        std::reverse(daughters.begin(), daughters.end());
        std::vector<std::vector<double>> embeddings;
        std::vector<corpus::Tree> children;
        for (const auto* d : daughters) {
          embeddings.push_back(d->entry.embedding);
          if (d->entry.subtree) children.push_back(*d->entry.subtree);
        }
        StackEntry e{StackEntry::Kind::Closed, frame.nt, compose(frame.nt, embeddings),
                     std::make_shared<const corpus::Tree>(corpus::Tree::node(vocab_.nt(frame.nt), std::move(children)))};
        ParserState base = s;
        base.stack_ = n->below;  // n is the open-NT node
        next = push(base, std::move(e));
      } else {
        StackEntry e{StackEntry::Kind::CloseBracket, frame.nt, row_of(*close_embedding_, frame.nt), nullptr};
        next = push(s, std::move(e));
      }
      next.open_ = frame.outer;
      --next.open_count_;
      break;
    }
  }
  const std::size_t length = s.history_ ? s.history_->length + 1 : 1;
  next.history_ = std::make_shared<ParserState::HistoryNode>(ParserState::HistoryNode{a, s.history_, length});
  next.log_prob_ = new_log_prob;
  return next;
}

std::vector<Successor> RnngModel::expand(const ParserState& s, WordId target, std::size_t sentence_length,
                                         const Limits& limits) const {
  std::vector<Successor> out;
  const ActionMask mask = valid_actions(s, s.words_emitted() >= sentence_length, limits);
  if (!mask[0] && !mask[1] && !mask[2]) return out;
  const std::array<double, 3> kind_lp = score_actions(s, mask);
  if (mask[kind_index(ActionKind::NT)]) {
    const std::vector<double> nt_lp = score_nonterminal(s);
    for (NtId id = 0; id < nt_lp.size(); ++id) {
      out.push_back({Action::nt(id), s.log_prob() + (kind_lp[kind_index(ActionKind::NT)] + nt_lp[id])});
    }
  }
  if (mask[kind_index(ActionKind::GEN)]) {
    const double w_lp = score_word(s)[target];
    out.push_back({Action::gen(target), s.log_prob() + (kind_lp[kind_index(ActionKind::GEN)] + w_lp)});
  }
  if (mask[kind_index(ActionKind::REDUCE)]) {
    out.push_back({Action::reduce(), s.log_prob() + kind_lp[kind_index(ActionKind::REDUCE)]});
  }
  return out;
}

std::vector<double> RnngModel::compose(NtId mother, std::span<const std::vector<double>> daughters) const {
  if (config_.variant != Variant::Full) throw std::logic_error("compose: model has no composition function");
  if (daughters.empty()) throw nn::EmptyInputError("compose: constituent has no daughters");
  std::vector<std::vector<double>> seq;
  seq.reserve(daughters.size() + 1);
  seq.push_back(row_of(*nt_embedding_, mother));
  seq.insert(seq.end(), daughters.begin(), daughters.end());
  return nn::bilstm_encode(seq, comp_fwd_, comp_bwd_, comp_proj_);
}

nn::Expr RnngModel::compose(nn::Graph& g, NtId mother, std::span<const nn::Expr> daughters) const {
  if (config_.variant != Variant::Full) throw std::logic_error("compose: model has no composition function");
  if (daughters.empty()) throw nn::EmptyInputError("compose: constituent has no daughters");
  std::vector<nn::Expr> seq;
  seq.reserve(daughters.size() + 1);
  seq.push_back(g.lookup(*nt_embedding_, mother));
  seq.insert(seq.end(), daughters.begin(), daughters.end());
  return nn::bilstm_encode(g, seq, comp_fwd_, comp_bwd_, comp_proj_);
}

std::vector<Action> RnngModel::to_model_actions(std::span<const corpus::Action> actions) const {
  std::vector<Action> out;
  out.reserve(actions.size());
  std::size_t word_index = 0;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const corpus::Action& a = actions[i];
    switch (a.kind) {
      case ActionKind::NT: {
        auto id = vocab_.find_nt(a.symbol);
        if (!id) throw corpus::OracleError("unknown nonterminal " + a.symbol, i);
        out.push_back(Action::nt(*id));
        break;
      }
      case ActionKind::GEN:
        out.push_back(Action::gen(corpus::map_token(a.symbol, vocab_, word_index == 0)));
        ++word_index;
        break;
      case ActionKind::REDUCE:
        out.push_back(Action::reduce());
        break;
    }
  }
  return out;
}

std::vector<corpus::Action> RnngModel::to_corpus_actions(std::span<const Action> actions,
                                                         std::span<const std::string> words) const {
  std::vector<corpus::Action> out;
  std::size_t w = 0;
  for (const Action& a : actions) {
    switch (a.kind) {
      case ActionKind::NT:
        out.push_back(corpus::Action::nt(vocab_.nt(a.id)));
        break;
      case ActionKind::GEN:
        out.push_back(corpus::Action::gen(w < words.size() ? words[w] : vocab_.word(a.id)));
        ++w;
        break;
      case ActionKind::REDUCE:
        out.push_back(corpus::Action::reduce());
        break;
    }
  }
  return out;
}

double RnngModel::sequence_log_prob(std::span<const Action> actions, std::size_t sentence_length,
                                    const Limits& limits) const {
  ParserState s = init_state();
  for (std::size_t i = 0; i < actions.size(); ++i) {
    try {
      s = apply_action(s, actions[i], sentence_length, limits);
    } catch (const InvalidActionError& e) {
      throw corpus::OracleError(e.what(), i);
    }
  }
  return s.log_prob();
}

double RnngModel::tree_logprob(const corpus::Tree& t, const Limits& limits) const {
  const auto actions = to_model_actions(corpus::tree_to_actions(t));
  return sequence_log_prob(actions, corpus::count_terminals(t), limits);
}

nn::Expr RnngModel::oracle_nll(nn::Graph& g, std::span<const Action> actions, std::size_t sentence_length,
                               const Limits& limits, double dropout_rate, std::mt19937_64* rng) const {
  if (dropout_rate > 0.0 && !rng) throw std::invalid_argument("oracle_nll: dropout needs a generator");
  struct Entry {
    nn::Expr embedding, h, c;
  };
  const std::size_t h = config_.hidden;
  const nn::Expr zeros = g.constant(std::vector<double>(h, 0.0));
  std::vector<Entry> stack;
  {
    const nn::Expr guard = g.parameter(*stack_guard_);
    const nn::LstmExpr out = nn::lstm_step(g, guard, zeros, zeros, stack_cell_);
    stack.push_back({guard, out.h, out.c});
  }
  auto push = [&](nn::Expr embedding) {
    const nn::LstmExpr out = nn::lstm_step(g, embedding, stack.back().h, stack.back().c, stack_cell_);
    stack.push_back({embedding, out.h, out.c});
  };

  std::vector<std::pair<NtId, std::size_t>> open;  // (label, stack size after push)
  std::size_t words = 0;
  std::vector<nn::Expr> terms;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const Action& a = actions[i];
    const DerivationView view{open.size(), !open.empty() && open.back().second == stack.size(), stack.size() > 1};
    const ActionMask mask = valid_kinds(view, words >= sentence_length, limits);
    if (!mask[kind_index(a.kind)]) {
      throw corpus::OracleError(std::string(corpus::to_string(a.kind)) + " is not valid here", i);
    }
    const nn::Expr summary = dropout_rate > 0.0 ? nn::dropout(g, stack.back().h, dropout_rate, *rng) : stack.back().h;
    const nn::Expr kind_lp = g.log_softmax(nn::mlp_forward(g, summary, heads_.action), allowed_indices(mask));
    terms.push_back(g.pick(kind_lp, kind_index(a.kind)));
    switch (a.kind) {
      case ActionKind::NT: {
        if (a.id >= vocab_.nt_count()) throw corpus::OracleError("nonterminal id out of range", i);
        terms.push_back(g.pick(g.log_softmax(nn::mlp_forward(g, summary, heads_.nonterminal)), a.id));
        push(g.lookup(*nt_embedding_, a.id));
        open.emplace_back(a.id, stack.size());
        break;
      }
      case ActionKind::GEN: {
        if (a.id >= vocab_.word_count()) throw corpus::OracleError("word id out of range", i);
        terms.push_back(g.pick(g.log_softmax(nn::mlp_forward(g, summary, heads_.word)), a.id));
        push(g.lookup(*word_embedding_, a.id));
        ++words;
        break;
      }
      case ActionKind::REDUCE: {
        const auto [label, depth] = open.back();
        open.pop_back();
        if (config_.variant == Variant::Full) {
          std::vector<nn::Expr> daughters;
          for (std::size_t k = depth; k < stack.size(); ++k) daughters.push_back(stack[k].embedding);
          stack.resize(depth - 1);  // drops daughters and the open nonterminal
          push(compose(g, label, daughters));
        } else {
          push(g.lookup(*close_embedding_, label));
        }
        break;
      }
    }
  }
  return g.scale(g.sum(terms), -1.0);
}

corpus::Tree RnngModel::to_tree(const ParserState& s, std::span<const std::string> words) const {
  const auto acts = to_corpus_actions(s.actions(), words);
  return corpus::actions_to_tree(acts);
}

}  // namespace rnng::model
