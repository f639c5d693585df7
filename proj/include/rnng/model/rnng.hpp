#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rnng/corpus/oracle.hpp"
#include "rnng/corpus/tree.hpp"
#include "rnng/corpus/vocab.hpp"
#include "rnng/nn/graph.hpp"
#include "rnng/nn/layers.hpp"
#include "rnng/nn/tensor.hpp"

namespace rnng::model {

using corpus::ActionKind;
using corpus::NtId;
using corpus::WordId;

enum class Variant { Full, NoComp };

const char* to_string(Variant v);
Variant parse_variant(const std::string& s);

/// Model action over vocabulary ids: nonterminal id for NT, word id for GEN.
struct Action {
  ActionKind kind = ActionKind::REDUCE;
  std::uint32_t id = 0;

  static Action nt(NtId id) { return {ActionKind::NT, id}; }
  static Action gen(WordId id) { return {ActionKind::GEN, id}; }
  static Action reduce() { return {ActionKind::REDUCE, 0}; }
  bool operator==(const Action&) const = default;
};

struct ModelConfig {
  Variant variant = Variant::Full;
  std::size_t embedding = 170;
  std::size_t hidden = 170;
  std::size_t scorer_hidden = 170;
  std::size_t composition_hidden = 170;
  std::uint64_t seed = 1;
};

/// Search-time constraints on the derivation.
struct Limits {
  std::size_t max_open = 40;
  /// Allows closing the outermost constituent before the sentence is consumed
  /// (free generation); parsing and training of known sentences keep it off.
  bool allow_early_root_close = false;
};

/// Indexed by ActionKind.
using ActionMask = std::array<bool, 3>;

inline std::size_t kind_index(ActionKind k) { return static_cast<std::size_t>(k); }

/// The plain-state facts that decide which action kinds are legal.
struct DerivationView {
  std::size_t open_count = 0;
  bool top_is_open_nt = false;
  bool started = false;
};

/// NT needs room under max_open and an unfinished derivation; GEN needs an open
/// constituent; REDUCE needs a non-empty open constituent and, for the
/// outermost one, a finished sentence (or allow_early_root_close). With a known
/// sentence, NT and GEN are unavailable once every word is generated.
ActionMask valid_kinds(const DerivationView& view, bool sentence_done, const Limits& limits);

struct StackEntry {
  enum class Kind : std::uint8_t { OpenNt, Terminal, Closed, CloseBracket };
  Kind kind = Kind::Terminal;
  std::uint32_t symbol = 0;
  std::vector<double> embedding;
  /// Terminals: the leaf. Closed constituents (full variant): the composed subtree.
  std::shared_ptr<const corpus::Tree> subtree;

  bool is_open_nonterminal() const { return kind == Kind::OpenNt; }
};

/// Immutable partial derivation. Copies share structure; applying an action
/// never modifies the source state.
class ParserState {
 public:
  std::size_t open_count() const { return open_count_; }
  std::size_t words_emitted() const { return words_; }
  double log_prob() const { return log_prob_; }
  std::size_t stack_size() const { return stack_->depth; }
  std::size_t action_count() const { return history_ ? history_->length : 0; }

  /// Final hidden state of the stack LSTM.
  std::span<const double> summary() const { return stack_->h; }
  /// Top to bottom, excluding the stack guard.
  std::vector<const StackEntry*> entries() const;
  const StackEntry* top() const { return stack_->depth ? &stack_->entry : nullptr; }
  std::vector<Action> actions() const;
  std::optional<Action> last_action() const;

  DerivationView view() const;
  bool finished() const { return open_count_ == 0 && stack_->depth > 0; }

 private:
  friend class RnngModel;

  struct StackNode {
    StackEntry entry;
    std::vector<double> h, c;
    std::shared_ptr<const StackNode> below;
    std::size_t depth = 0;
  };
  struct OpenFrame {
    NtId nt;
    std::size_t depth;  // stack depth right after the NT was pushed
    std::shared_ptr<const OpenFrame> outer;
  };
  struct HistoryNode {
    Action action;
    std::shared_ptr<const HistoryNode> prev;
    std::size_t length;
  };

  std::shared_ptr<const StackNode> stack_;
  std::shared_ptr<const OpenFrame> open_;
  std::shared_ptr<const HistoryNode> history_;
  std::size_t open_count_ = 0;
  std::size_t words_ = 0;
  double log_prob_ = 0.0;
};

class InvalidActionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A successor of a parser state with its total log-probability.
struct Successor {
  Action action;
  double log_prob;
};

/// Generative RNNG: a stack LSTM summarizes the stack; three MLP heads score
/// the action kind, the nonterminal to open, and the word to generate. The
/// full variant composes closed constituents with a BiLSTM; the no-comp
/// variant pushes a labeled close-bracket symbol instead.
class RnngModel {
 public:
  using State = ParserState;

  RnngModel(corpus::Vocab vocab, ModelConfig config);

  static RnngModel load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  const corpus::Vocab& vocab() const { return vocab_; }
  const ModelConfig& config() const { return config_; }
  Variant variant() const { return config_.variant; }
  nn::ParameterStore& params() { return params_; }
  const nn::ParameterStore& params() const { return params_; }

  ParserState init_state() const;

  ActionMask valid_actions(const ParserState& s, bool sentence_done, const Limits& limits) const;

  /// Masked log-probabilities over action kinds, indexed by ActionKind.
  std::array<double, 3> score_actions(const ParserState& s, const ActionMask& mask) const;
  std::vector<double> score_nonterminal(const ParserState& s) const;
  std::vector<double> score_word(const ParserState& s) const;

  /// Total log-probability of `a` at `s` (kind times symbol). Throws if invalid.
  double action_log_prob(const ParserState& s, const Action& a, std::size_t sentence_length,
                         const Limits& limits) const;

  /// Scores and applies `a`. Throws InvalidActionError when `a` is not valid.
  ParserState apply_action(const ParserState& s, const Action& a, std::size_t sentence_length,
                           const Limits& limits) const;
  /// Applies `a` with a precomputed resulting log-probability (no validity check).
  ParserState advance(const ParserState& s, const Action& a, double new_log_prob) const;

  /// Valid successors of `s` for the next word `target` (GEN restricted to it),
  /// in the order: nonterminals by id, GEN, REDUCE.
  std::vector<Successor> expand(const ParserState& s, WordId target, std::size_t sentence_length,
                                const Limits& limits) const;

  /// Composition of a closed constituent: BiLSTM over [mother, daughters...].
  std::vector<double> compose(NtId mother, std::span<const std::vector<double>> daughters) const;
  nn::Expr compose(nn::Graph& g, NtId mother, std::span<const nn::Expr> daughters) const;

  /// Maps an oracle to model actions; words pass through map_token.
  std::vector<Action> to_model_actions(std::span<const corpus::Action> actions) const;
  std::vector<corpus::Action> to_corpus_actions(std::span<const Action> actions,
                                                std::span<const std::string> words) const;

  /// Sum of action log-probabilities along the derivation (eager path).
  double sequence_log_prob(std::span<const Action> actions, std::size_t sentence_length,
                           const Limits& limits = {}) const;
  double tree_logprob(const corpus::Tree& t, const Limits& limits = {}) const;

  /// Negative log-likelihood of the derivation as a graph expression.
  /// Throws corpus::OracleError naming the first action that is invalid.
  /// With `dropout`, the stack summary feeding the heads is dropped out at
  /// `dropout_rate` using `rng`.
  nn::Expr oracle_nll(nn::Graph& g, std::span<const Action> actions, std::size_t sentence_length,
                      const Limits& limits = {}, double dropout_rate = 0.0, std::mt19937_64* rng = nullptr) const;

  /// Rebuilds the tree of a finished state; `words` supplies the surface tokens.
  corpus::Tree to_tree(const ParserState& s, std::span<const std::string> words) const;

 private:
  struct Heads {
    nn::MlpParams action, nonterminal, word;
  };

  void bind();
  ParserState push(const ParserState& s, StackEntry entry) const;

  corpus::Vocab vocab_;
  ModelConfig config_;
  nn::ParameterStore params_;

  nn::Parameter* word_embedding_ = nullptr;
  nn::Parameter* nt_embedding_ = nullptr;
  nn::Parameter* close_embedding_ = nullptr;
  nn::Parameter* stack_guard_ = nullptr;
  nn::RnnCellParams stack_cell_;
  Heads heads_;
  nn::RnnCellParams comp_fwd_, comp_bwd_;
  nn::MlpParams comp_proj_;
};

}  // namespace rnng::model
