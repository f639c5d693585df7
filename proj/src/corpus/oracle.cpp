#include "rnng/corpus/oracle.hpp"

#include <optional>

namespace rnng::corpus {

const char* to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::NT: return "NT";
    case ActionKind::GEN: return "GEN";
    case ActionKind::REDUCE: return "REDUCE";
  }
  return "?";
}

std::string to_string(const Action& a) {
  if (a.kind == ActionKind::REDUCE) return "REDUCE";
  return std::string(to_string(a.kind)) + "(" + a.symbol + ")";
}

namespace {
void traverse(const Tree& t, std::vector<Action>& out) {
  if (t.is_terminal()) {
    out.push_back(Action::gen(t.label));
    return;
  }
  out.push_back(Action::nt(t.label));
  for (const Tree& c : t.children) traverse(c, out);
  out.push_back(Action::reduce());
}
}  // namespace

std::vector<Action> tree_to_actions(const Tree& t) {
  std::vector<Action> out;
  traverse(t, out);
  return out;
}

Tree actions_to_tree(std::span<const Action> actions) {
  std::vector<Tree> open;
  std::optional<Tree> root;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const Action& a = actions[i];
    if (root) throw OracleError("action after the root constituent closed", i);
    switch (a.kind) {
      case ActionKind::NT:
        if (a.symbol.empty()) throw OracleError("NT without a label", i);
        open.push_back(Tree::node(a.symbol, {}));
        break;
      case ActionKind::GEN:
        if (open.empty()) throw OracleError("GEN outside any open constituent", i);
        if (a.symbol.empty()) throw OracleError("GEN without a word", i);
        open.back().children.push_back(Tree::leaf(a.symbol));
        break;
      case ActionKind::REDUCE: {
        if (open.empty()) throw OracleError("REDUCE with no open constituent", i);
        if (open.back().children.empty()) throw OracleError("REDUCE of an empty constituent", i);
        Tree done = std::move(open.back());
        open.pop_back();
        if (open.empty()) {
          root = std::move(done);
        } else {
          open.back().children.push_back(std::move(done));
        }
        break;
      }
    }
  }
  if (!root) throw OracleError("derivation does not complete a root constituent", actions.size());
  return *root;
}

std::vector<std::string> bracket_symbols(std::span<const Action> actions) {
  std::vector<std::string> out;
  std::vector<std::string> open;
  out.reserve(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const Action& a = actions[i];
    switch (a.kind) {
      case ActionKind::NT:
        open.push_back(a.symbol);
        out.push_back("(" + a.symbol);
        break;
      case ActionKind::GEN:
        out.push_back(a.symbol);
        break;
      case ActionKind::REDUCE:
        if (open.empty()) throw OracleError("REDUCE with no open constituent", i);
        out.push_back(")" + open.back());
        open.pop_back();
        break;
    }
  }
  return out;
}

std::vector<std::string> bracket_symbols(const Tree& t) { return bracket_symbols(tree_to_actions(t)); }

}  // namespace rnng::corpus
