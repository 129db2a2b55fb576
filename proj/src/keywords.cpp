#include "pmctg/keywords.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace pmctg {

const std::unordered_set<std::string>& default_stopwords() {
  static const std::unordered_set<std::string> words = {
      "a",       "about",   "above", "after", "again",  "against", "all",
      "am",      "an",      "and",   "any",   "are",    "as",      "at",
      "be",      "because", "been",  "before", "being", "below",   "between",
      "both",    "but",     "by",    "can",   "could",  "did",     "do",
      "does",    "doing",   "down",  "during", "each",  "few",     "for",
      "from",    "further", "had",   "has",   "have",   "having",  "he",
      "her",     "here",    "hers",  "herself", "him",  "himself", "his",
      "how",     "i",       "if",    "in",    "into",   "is",      "it",
      "its",     "itself",  "just",  "me",    "more",   "most",    "my",
      "myself",  "no",      "nor",   "not",   "now",    "of",      "off",
      "on",      "once",    "only",  "or",    "other",  "our",     "ours",
      "ourselves", "out",   "over",  "own",   "same",   "she",     "should",
      "so",      "some",    "such",  "than",  "that",   "the",     "their",
      "theirs",  "them",    "themselves", "then", "there", "these", "they",
      "this",    "those",   "through", "to",  "too",    "under",   "until",
      "up",      "very",    "was",   "we",    "were",   "what",    "when",
      "where",   "which",   "while", "who",   "whom",   "why",     "will",
      "with",    "would",   "you",   "your",  "yours",  "yourself",
      "yourselves"};
  return words;
}

bool is_content_token(TokenId id, const Vocabulary& vocab,
                      const std::unordered_set<std::string>& stopwords) {
  if (is_special(id)) return false;
  const auto& surface = vocab.surface(id);
  if (stopwords.count(to_lower(surface))) return false;
  return std::any_of(surface.begin(), surface.end(), [](unsigned char c) {
    return std::isalnum(c) != 0;
  });
}

TfIdfKeywordExtractor::TfIdfKeywordExtractor(const Vocabulary& vocab,
                                             std::size_t max_keywords,
                                             std::unordered_set<std::string> stopwords)
    : vocab_(&vocab), max_keywords_(max_keywords), stopwords_(std::move(stopwords)) {}

std::vector<Keyword> TfIdfKeywordExtractor::extract(const Sentence& s) const {
  std::vector<Keyword> ranked;
  if (max_keywords_ == 0 || s.empty()) return ranked;

  const double total = static_cast<double>(vocab_->total_count());
  const double length = static_cast<double>(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const TokenId id = s[i];
    if (!is_content_token(id, *vocab_, stopwords_)) continue;
    bool seen = false;
    for (std::size_t j = 0; j < i && !seen; ++j) seen = s[j] == id;
    if (seen) continue;
    const auto occurrences = std::count(s.tokens().begin(), s.tokens().end(), id);
    const double tf = static_cast<double>(occurrences) / length;
    const double idf = std::log((1.0 + total) /
                                (1.0 + static_cast<double>(vocab_->count(id))));
    ranked.push_back({id, i, tf * idf});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Keyword& a, const Keyword& b) { return a.score > b.score; });
  if (ranked.size() > max_keywords_) ranked.resize(max_keywords_);
  return ranked;
}

}  // namespace pmctg
