#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "pmctg/text.hpp"

namespace pmctg {

struct Keyword {
  TokenId token;
  std::size_t index;  // position in the source sentence
  double score = 0.0;
};

class KeywordExtractor {
 public:
  virtual ~KeywordExtractor() = default;
  // Ranked best first; at most max_keywords() entries, all drawn from `s`.
  virtual std::vector<Keyword> extract(const Sentence& s) const = 0;
  virtual std::size_t max_keywords() const = 0;
};

const std::unordered_set<std::string>& default_stopwords();

// True for tokens that carry content: not special, not a stopword, and
// containing at least one alphanumeric character.
bool is_content_token(TokenId id, const Vocabulary& vocab,
                      const std::unordered_set<std::string>& stopwords);

// tf(w) = occurrences / length, idf(w) = ln((1 + N) / (1 + count(w))) with
// N the total corpus count. Repeated tokens keep their first index; ties
// go to the earlier index. `vocab` must outlive the extractor.
class TfIdfKeywordExtractor final : public KeywordExtractor {
 public:
  explicit TfIdfKeywordExtractor(const Vocabulary& vocab, std::size_t max_keywords = 3,
                                 std::unordered_set<std::string> stopwords =
                                     default_stopwords());

  std::vector<Keyword> extract(const Sentence& s) const override;
  std::size_t max_keywords() const override { return max_keywords_; }

 private:
  const Vocabulary* vocab_;
  std::size_t max_keywords_;
  std::unordered_set<std::string> stopwords_;
};

}  // namespace pmctg
