#include "rnng/corpus/tree.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace rnng::corpus {

namespace {

class BracketParser {
 public:
  explicit BracketParser(std::string_view text) : text_(text) {}

  Tree parse() {
    skip_space();
    if (at_end()) throw TreeParseError("empty input", pos_);
    if (text_[pos_] != '(') throw TreeParseError("expected '('", pos_);
    Tree t = parse_constituent();
    skip_space();
    if (!at_end()) throw TreeParseError("trailing text after tree", pos_);
    if (t.label.empty()) {
      if (t.children.size() != 1 || t.children[0].is_terminal()) {
        throw TreeParseError("unlabeled outer bracket must wrap exactly one constituent", 0);
      }
      Tree inner = std::move(t.children[0]);
      return inner;
    }
    return t;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string token() {
    const std::size_t start = pos_;
    while (!at_end() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  Tree parse_constituent() {
    const std::size_t open = pos_;
    ++pos_;  // '('
    Tree t;
    if (!at_end() && text_[pos_] != '(' && !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      t.label = token();
    }
    for (;;) {
      skip_space();
      if (at_end()) throw TreeParseError("unbalanced brackets: missing ')'", pos_);
      const char ch = text_[pos_];
      if (ch == ')') {
        if (t.children.empty()) throw TreeParseError("empty constituent", open);
        ++pos_;
        return t;
      }
      if (ch == '(') {
        Tree child = parse_constituent();
        if (child.label.empty()) throw TreeParseError("unlabeled constituent", open);
        t.children.push_back(std::move(child));
      } else {
        t.children.push_back(Tree::leaf(token()));
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void render_into(const Tree& t, std::string& out) {
  if (t.is_terminal()) {
    out += t.label;
    return;
  }
  out += '(';
  out += t.label;
  for (const Tree& c : t.children) {
    out += ' ';
    render_into(c, out);
  }
  out += ')';
}

void yield_into(const Tree& t, std::vector<std::string>& out) {
  if (t.is_terminal()) {
    out.push_back(t.label);
    return;
  }
  for (const Tree& c : t.children) yield_into(c, out);
}

}  // namespace

Tree parse_bracketed(std::string_view line) {
  BracketParser parser(line);
  Tree t = parser.parse();
  if (t.is_terminal()) throw TreeParseError("root must be a constituent", 0);
  return t;
}

std::string render(const Tree& t) {
  std::string out;
  render_into(t, out);
  return out;
}

std::vector<std::string> yield(const Tree& t) {
  std::vector<std::string> out;
  yield_into(t, out);
  return out;
}

std::size_t count_nonterminals(const Tree& t) {
  if (t.is_terminal()) return 0;
  std::size_t n = 1;
  for (const Tree& c : t.children) n += count_nonterminals(c);
  return n;
}

std::size_t count_terminals(const Tree& t) {
  if (t.is_terminal()) return 1;
  std::size_t n = 0;
  for (const Tree& c : t.children) n += count_terminals(c);
  return n;
}

std::size_t depth(const Tree& t) {
  if (t.is_terminal()) return 0;
  std::size_t d = 0;
  for (const Tree& c : t.children) d = std::max(d, depth(c));
  return d + 1;
}

std::vector<Tree> read_treebank(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open treebank " + path.string());
  std::vector<Tree> trees;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    try {
      trees.push_back(parse_bracketed(line));
    } catch (const TreeParseError& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return trees;
}

void write_treebank(const std::filesystem::path& path, const std::vector<Tree>& trees) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const Tree& t : trees) out << render(t) << '\n';
}

std::vector<std::vector<std::string>> read_sentences(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::vector<std::string> toks;
    for (std::string w; ss >> w;) toks.push_back(w);
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

}  // namespace rnng::corpus
