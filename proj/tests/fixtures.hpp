#pragma once

#include <doctest.h>

#include <string>
#include <vector>

#include "pmctg/model_io.hpp"
#include "pmctg/random.hpp"
#include "pmctg/synthetic.hpp"
#include "pmctg/text.hpp"

namespace pmctg::testing {

inline Corpus corpus_of(std::vector<std::string> lines) {
  return build_corpus(lines, false, 1);
}

// Toy backends shared by the tests of one binary.
inline const ModelBundle& toy_bundle() {
  static const ModelBundle bundle = [] {
    const auto lines = toy_corpus({10000, 0.1, 1});
    return train_bundle(build_corpus(lines, false, 1));
  }();
  return bundle;
}

// Uniformly drawn content tokens (no specials).
inline std::vector<TokenId> random_tokens(const Vocabulary& vocab, std::size_t n, Rng& rng) {
  std::vector<TokenId> out;
  const auto content = vocab.size() - kNumSpecials;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(static_cast<TokenId>(
        kNumSpecials + std::min<std::size_t>(
                           content - 1, static_cast<std::size_t>(uniform01(rng) * content))));
  }
  return out;
}

inline Sentence sentence_of(const Vocabulary& vocab, const std::string& text) {
  return tokenize(text, vocab, false);
}

}  // namespace pmctg::testing
