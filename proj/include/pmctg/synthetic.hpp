#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pmctg/keywords.hpp"
#include "pmctg/random.hpp"
#include "pmctg/search.hpp"

namespace pmctg {

// Small template grammar with topic-coupled verbs and objects. Used to
// build deterministic corpora for tests, benchmarks and `make-corpus`.
struct ToyCorpusOptions {
  std::size_t sentences = 10000;
  // Fraction of sentences that receive one filler token at a random slot.
  double noise_rate = 0.2;
  std::uint64_t seed = 1;
};

std::string toy_sentence(Rng& rng);
std::vector<std::string> toy_corpus(const ToyCorpusOptions& options);

const std::vector<std::string>& toy_filler_tokens();

// Inserts one filler token strictly inside the sentence (never first or
// last), so the corruption is surrounded by regular context. `slot`
// receives the filler's token index.
std::string insert_filler(std::string_view sentence, Rng& rng,
                          std::size_t* slot = nullptr);

// Soft-task inputs whose source carries one filler token. Keywords are
// extracted from the clean sentence and re-indexed into the corrupted one,
// so the filler itself is never protected.
struct FillerCase {
  std::string clean;
  std::string noisy;
  std::size_t filler_index = 0;
  TaskInput input;
};
std::vector<FillerCase> filler_suite(const Vocabulary& vocab,
                                     const KeywordExtractor& extractor, std::size_t count,
                                     Rng& rng);

// Picks between 1 and `max_keywords` distinct content tokens of `sentence`
// in their original order. Empty when the sentence has no content token.
std::vector<std::string> sample_keywords(std::string_view sentence,
                                         std::size_t max_keywords, Rng& rng);

}  // namespace pmctg
