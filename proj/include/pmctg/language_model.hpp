#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pmctg/text.hpp"

namespace pmctg {

enum class Direction { kForward, kBackward };

struct Candidate {
  TokenId token;
  double probability;
};

// Causal language model. Contexts are given in the model's own reading
// order: a backward model reads the reversed suffix, nearest token last.
class CausalLM {
 public:
  virtual ~CausalLM() = default;

  virtual Direction direction() const = 0;

  // The top_k most probable non-special tokens, renormalized to sum to 1.
  virtual std::vector<Candidate> next_token_distribution(
      std::span<const TokenId> context, std::size_t top_k) const = 0;

  // -(1/m) sum ln p(x_i | x_<i) over `tokens` in reading order. With
  // `terminal`, EOS is scored as an extra factor and the mean is over m+1.
  virtual double sequence_nll(std::span<const TokenId> tokens,
                              bool terminal) const = 0;
};

// Reverses the sentence for backward models so callers pass text order.
double sequence_nll(const CausalLM& lm, const Sentence& s, bool terminal);

// Interpolated Kneser-Ney with one absolute discount shared by all orders.
// The highest order uses raw counts, lower orders continuation counts, and
// the unigram level interpolates with a uniform floor over every token the
// model can emit (EOS, UNK, content), so all probabilities stay positive.
class KneserNeyLM final : public CausalLM {
 public:
  static KneserNeyLM train(const Corpus& corpus, int order = 3,
                           double discount = 0.75,
                           Direction direction = Direction::kForward);

  Direction direction() const override { return direction_; }
  std::vector<Candidate> next_token_distribution(
      std::span<const TokenId> context, std::size_t top_k) const override;
  double sequence_nll(std::span<const TokenId> tokens,
                      bool terminal) const override;

  double probability(TokenId token, std::span<const TokenId> context) const;
  // Indexed by token id; zero for ids the model never emits.
  std::vector<double> distribution(std::span<const TokenId> context) const;

  int order() const { return order_; }
  double discount() const { return discount_; }
  std::size_t vocab_size() const { return vocab_size_; }
  std::uint64_t vocab_hash() const { return vocab_hash_; }
  // Distinct n-grams per order, index 0 = unigrams.
  std::vector<std::size_t> ngram_counts() const;

  static bool is_emittable(TokenId id) {
    return id == kEos || id == kUnk || !is_special(id);
  }

  // Text format: header "KNLM v1 order=N discount=D vocab_hash=H
  // direction=forward", then per order a "\k-grams:" line followed by
  // "w1 w2 ...<TAB>count" rows in id order.
  void write(std::ostream& out, const Vocabulary& vocab) const;
  static KneserNeyLM read(std::istream& in, const Vocabulary& vocab);

 private:
  using Key = std::u32string;
  using RawTable = std::map<std::vector<TokenId>, std::uint64_t>;

  struct ContextStats {
    double total = 0.0;
    std::size_t distinct = 0;
    std::vector<std::pair<TokenId, double>> successors;  // sorted by id
  };

  KneserNeyLM() = default;
  void build();
  Key context_key(std::span<const TokenId> padded, int length) const;
  std::vector<TokenId> padded_context(std::span<const TokenId> context) const;

  int order_ = 3;
  double discount_ = 0.75;
  Direction direction_ = Direction::kForward;
  std::size_t vocab_size_ = 0;
  std::uint64_t vocab_hash_ = 0;
  std::size_t emittable_ = 0;

  std::vector<RawTable> raw_;  // raw event counts, index k-1 for order k
  std::vector<std::unordered_map<Key, ContextStats>> contexts_;
  std::vector<double> unigram_;
};

std::string_view to_string(Direction d);

}  // namespace pmctg
