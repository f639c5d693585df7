#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rnng/corpus/tree.hpp"

namespace rnng::corpus {

enum class ActionKind : std::uint8_t { NT, GEN, REDUCE };

const char* to_string(ActionKind kind);

/// One step of the generative derivation. `symbol` is the nonterminal for NT,
/// the word for GEN, and empty for REDUCE.
struct Action {
  ActionKind kind = ActionKind::REDUCE;
  std::string symbol;

  static Action nt(std::string label) { return {ActionKind::NT, std::move(label)}; }
  static Action gen(std::string word) { return {ActionKind::GEN, std::move(word)}; }
  static Action reduce() { return {ActionKind::REDUCE, {}}; }

  bool operator==(const Action&) const = default;
};

std::string to_string(const Action& a);

class OracleError : public std::invalid_argument {
 public:
  OracleError(const std::string& what, std::size_t index)
      : std::invalid_argument(what + " at action " + std::to_string(index)), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// Depth-first, left-to-right derivation: NT on entry, GEN per word, REDUCE on exit.
std::vector<Action> tree_to_actions(const Tree& t);

/// Inverse of tree_to_actions. Rejects REDUCE without an open constituent,
/// empty constituents, GEN outside a constituent, and anything but exactly
/// one completed root.
Tree actions_to_tree(std::span<const Action> actions);

/// One symbol per action: "(X" for NT, the word for GEN, ")X" for REDUCE.
std::vector<std::string> bracket_symbols(std::span<const Action> actions);
std::vector<std::string> bracket_symbols(const Tree& t);

}  // namespace rnng::corpus
