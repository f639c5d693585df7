#pragma once

#include <cstdint>
#include <vector>

#include "rnng/corpus/tree.hpp"

namespace rnng::corpus {

/// Samples trees from a small unambiguous English-like grammar with five
/// nonterminals (S, NP, VP, PP, ADJP) and twenty words. Words attach directly
/// under phrases, e.g. (S (NP the (ADJP hungry) cat) (VP sleeps)).
std::vector<Tree> generate_toy_treebank(std::size_t n, std::uint64_t seed, std::size_t max_words = 12);

}  // namespace rnng::corpus
