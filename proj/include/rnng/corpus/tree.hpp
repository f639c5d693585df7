#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rnng::corpus {

/// Phrase-structure tree. Terminals are leaves; every nonterminal has at least one child.
struct Tree {
  std::string label;
  std::vector<Tree> children;

  static Tree leaf(std::string word) { return Tree{std::move(word), {}}; }
  static Tree node(std::string label, std::vector<Tree> children) { return Tree{std::move(label), std::move(children)}; }

  bool is_terminal() const { return children.empty(); }
  bool operator==(const Tree&) const = default;
};

class TreeParseError : public std::runtime_error {
 public:
  TreeParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Parses one bracketed tree such as "(S (NP the cat) (VP meows))". A bare
/// outer bracket "( (S ...))" is unwrapped.
Tree parse_bracketed(std::string_view line);

/// Canonical single-line form; parse_bracketed(render(t)) == t.
std::string render(const Tree& t);

std::vector<std::string> yield(const Tree& t);
std::size_t count_nonterminals(const Tree& t);
std::size_t count_terminals(const Tree& t);
std::size_t depth(const Tree& t);

/// One tree per non-blank line. Errors carry the 1-based line number.
std::vector<Tree> read_treebank(const std::filesystem::path& path);
void write_treebank(const std::filesystem::path& path, const std::vector<Tree>& trees);

/// Tokenized sentences: one per line, space separated.
std::vector<std::vector<std::string>> read_sentences(const std::filesystem::path& path);

}  // namespace rnng::corpus
