// Writes the bundled toy treebank: train/dev/test trees and test tokens.
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rnng/corpus/toy.hpp"
#include "rnng/corpus/tree.hpp"

namespace fs = std::filesystem;
using namespace rnng::corpus;

int main(int argc, char** argv) {
  const fs::path dir = argc > 1 ? argv[1] : "data/toy";
  fs::create_directories(dir);
  write_treebank(dir / "train.trees", generate_toy_treebank(200, 1));
  write_treebank(dir / "dev.trees", generate_toy_treebank(50, 2));
  const auto test = generate_toy_treebank(50, 3);
  write_treebank(dir / "test.trees", test);
  std::ofstream tokens(dir / "test.tokens");
  for (const auto& t : test) {
    const auto words = yield(t);
    for (std::size_t i = 0; i < words.size(); ++i) tokens << (i ? " " : "") << words[i];
    tokens << '\n';
  }
  std::printf("wrote toy treebank to %s\n", dir.string().c_str());
}
