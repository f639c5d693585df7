#include "rnng/corpus/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <stdexcept>

namespace rnng::corpus {

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string lowercase(std::string_view w) {
  std::string out(w);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void count_words(const Tree& t, std::map<std::string, std::size_t>& words, std::set<std::string>& nts) {
  if (t.is_terminal()) {
    ++words[t.label];
    return;
  }
  nts.insert(t.label);
  for (const Tree& c : t.children) count_words(c, words, nts);
}

}  // namespace

std::string unknown_class(std::string_view word, bool sentence_initial) {
  bool any_letter = false, any_digit = false, all_numeric = true, any_lower = false;
  for (unsigned char c : word) {
    if (std::isalpha(c)) {
      any_letter = true;
      if (std::islower(c)) any_lower = true;
    }
    if (std::isdigit(c)) any_digit = true;
    if (!std::isdigit(c) && c != '.' && c != ',' && c != '-' && c != '/' && c != ':') all_numeric = false;
  }
  if (any_digit && all_numeric) return "<UNK-NUM>";
  if (any_digit) return "<UNK-DIGIT>";
  if (!any_letter) return "<UNK-PUNCT>";
  if (!sentence_initial && std::isupper(static_cast<unsigned char>(word.front()))) {
    return (!any_lower && word.size() > 1) ? "<UNK-ALLCAPS>" : "<UNK-CAP>";
  }
  const std::string w = lowercase(word);
  if (w.find('-') != std::string::npos) return "<UNK-DASH>";
  if (ends_with(w, "ing")) return "<UNK-ING>";
  if (ends_with(w, "ed")) return "<UNK-ED>";
  if (ends_with(w, "ly")) return "<UNK-LY>";
  if (ends_with(w, "ion")) return "<UNK-ION>";
  if (ends_with(w, "est")) return "<UNK-EST>";
  if (ends_with(w, "er")) return "<UNK-ER>";
  if (ends_with(w, "al")) return "<UNK-AL>";
  if (ends_with(w, "s") && !ends_with(w, "ss")) return "<UNK-S>";
  return "<UNK-LC>";
}

void Vocab::index() {
  word_index_.clear();
  nt_index_.clear();
  for (WordId i = 0; i < words_.size(); ++i) word_index_.emplace(words_[i], i);
  for (NtId i = 0; i < nts_.size(); ++i) nt_index_.emplace(nts_[i], i);
}

std::optional<WordId> Vocab::find_word(std::string_view w) const {
  auto it = word_index_.find(std::string(w));
  if (it == word_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<NtId> Vocab::find_nt(std::string_view label) const {
  auto it = nt_index_.find(std::string(label));
  if (it == nt_index_.end()) return std::nullopt;
  return it->second;
}

NtId Vocab::nt_id(std::string_view label) const {
  if (auto id = find_nt(label)) return *id;
  throw std::out_of_range("unknown nonterminal: " + std::string(label));
}

std::uint64_t Vocab::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  };
  for (const auto& w : words_) mix(w);
  mix("\x01");
  for (const auto& n : nts_) mix(n);
  return h;
}

void Vocab::write_tsv(std::ostream& out) const {
  for (WordId i = 0; i < words_.size(); ++i) out << words_[i] << '\t' << i << '\t' << counts_[i] << '\n';
}

nlohmann::json Vocab::to_json() const {
  return {{"min_count", min_count_}, {"words", words_}, {"counts", counts_}, {"nonterminals", nts_}};
}

Vocab Vocab::from_json(const nlohmann::json& j) {
  Vocab v;
  v.min_count_ = j.at("min_count").get<int>();
  v.words_ = j.at("words").get<std::vector<std::string>>();
  v.counts_ = j.at("counts").get<std::vector<std::size_t>>();
  v.nts_ = j.at("nonterminals").get<std::vector<std::string>>();
  if (v.counts_.size() != v.words_.size() || v.words_.size() < kUnknownClasses.size()) {
    throw std::invalid_argument("inconsistent vocabulary tables");
  }
  for (std::size_t i = 0; i < kUnknownClasses.size(); ++i) {
    if (v.words_[i] != kUnknownClasses[i]) throw std::invalid_argument("vocabulary lacks unknown-word classes");
  }
  v.index();
  return v;
}

Vocab build_vocab(const std::vector<Tree>& trees, int min_count) {
  if (trees.empty()) throw std::invalid_argument("build_vocab: empty corpus");
  if (min_count < 1) throw std::invalid_argument("build_vocab: min_count must be >= 1");
  std::map<std::string, std::size_t> freq;
  std::set<std::string> nts;
  for (const Tree& t : trees) count_words(t, freq, nts);

  std::vector<std::pair<std::string, std::size_t>> kept;
  std::map<std::string, std::size_t> unk_counts;
  for (const auto& [w, n] : freq) {
    if (n >= static_cast<std::size_t>(min_count)) kept.emplace_back(w, n);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  std::set<std::string> kept_words;
  for (const auto& [w, n] : kept) kept_words.insert(w);
  for (const Tree& t : trees) {
    const auto words = yield(t);
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (!kept_words.count(words[i])) ++unk_counts[unknown_class(words[i], i == 0)];
    }
  }

  Vocab v;
  v.min_count_ = min_count;
  for (const char* cls : kUnknownClasses) {
    v.words_.emplace_back(cls);
    v.counts_.push_back(unk_counts[cls]);
  }
  for (const auto& [w, n] : kept) {
    v.words_.push_back(w);
    v.counts_.push_back(n);
  }
  v.nts_.assign(nts.begin(), nts.end());
  v.index();
  return v;
}

WordId map_token(std::string_view word, const Vocab& v, bool sentence_initial) {
  if (auto id = v.find_word(word)) return *id;
  if (sentence_initial) {
    if (auto id = v.find_word(lowercase(word))) return *id;
  }
  return *v.find_word(unknown_class(word, sentence_initial));
}

std::vector<WordId> map_sentence(const std::vector<std::string>& tokens, const Vocab& v) {
  std::vector<WordId> out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) out.push_back(map_token(tokens[i], v, i == 0));
  return out;
}

}  // namespace rnng::corpus
