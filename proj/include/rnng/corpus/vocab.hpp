#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "rnng/corpus/tree.hpp"

namespace rnng::corpus {

using WordId = std::uint32_t;
using NtId = std::uint32_t;

/// Orthographic classes for out-of-vocabulary words, checked in this order.
inline constexpr std::array<const char*, 15> kUnknownClasses = {
    "<UNK-NUM>", "<UNK-DIGIT>", "<UNK-PUNCT>", "<UNK-ALLCAPS>", "<UNK-CAP>",
    "<UNK-DASH>", "<UNK-ING>",  "<UNK-ED>",    "<UNK-LY>",      "<UNK-ION>",
    "<UNK-EST>",  "<UNK-ER>",   "<UNK-AL>",    "<UNK-S>",       "<UNK-LC>"};

/// Class for an unseen word. Sentence-initial capitalization is ignored.
std::string unknown_class(std::string_view word, bool sentence_initial);

/// Word and nonterminal tables. Word ids: the unknown classes first, then
/// retained words by descending frequency, ties lexicographic. Nonterminals
/// are sorted lexicographically.
class Vocab {
 public:
  std::size_t word_count() const { return words_.size(); }
  std::size_t nt_count() const { return nts_.size(); }
  int min_count() const { return min_count_; }

  const std::string& word(WordId id) const { return words_.at(id); }
  std::size_t count(WordId id) const { return counts_.at(id); }
  std::optional<WordId> find_word(std::string_view w) const;
  bool is_unknown_class(WordId id) const { return id < kUnknownClasses.size(); }

  const std::string& nt(NtId id) const { return nts_.at(id); }
  std::optional<NtId> find_nt(std::string_view label) const;
  NtId nt_id(std::string_view label) const;

  /// FNV-1a over the serialized tables; identifies the vocabulary in checkpoints.
  std::uint64_t hash() const;

  /// `word<TAB>id<TAB>count` rows in id order.
  void write_tsv(std::ostream& out) const;

  nlohmann::json to_json() const;
  static Vocab from_json(const nlohmann::json& j);

  friend Vocab build_vocab(const std::vector<Tree>& trees, int min_count);

 private:
  void index();

  int min_count_ = 1;
  std::vector<std::string> words_;
  std::vector<std::size_t> counts_;
  std::vector<std::string> nts_;
  std::unordered_map<std::string, WordId> word_index_;
  std::unordered_map<std::string, NtId> nt_index_;
};

Vocab build_vocab(const std::vector<Tree>& trees, int min_count);

/// Total and deterministic. Known words map to their id; sentence-initially a
/// lowercased known form is also accepted; anything else maps to its unknown class.
WordId map_token(std::string_view word, const Vocab& v, bool sentence_initial);

std::vector<WordId> map_sentence(const std::vector<std::string>& tokens, const Vocab& v);

}  // namespace rnng::corpus
