#pragma once

#include <string>

#include "pmctg/encoder.hpp"
#include "pmctg/keywords.hpp"
#include "pmctg/language_model.hpp"

// Clients for the model server's JSON-over-HTTP interface:
//   GET  /v1/health          -> {status, masked_model, causal_model, dim}
//   POST /v1/encode          {tokens, mask_positions} -> {vectors, dim}
//   POST /v1/sentence_vector {tokens} -> {vector}
//   POST /v1/next_token      {prefix, top_k} -> {tokens, logprobs}
//   POST /v1/nll             {tokens} -> {nll}
//   POST /v1/keywords        {tokens, k} -> {keywords, indices}
// Every call opens its own connection, so handles are safe to share
// between threads. Transport failures raise kBackendUnavailable.
namespace pmctg {

struct ServerHealth {
  std::string status;
  std::string masked_model;
  std::string causal_model;
  std::size_t dim = 0;
};

ServerHealth query_health(const std::string& url, int timeout_seconds = 30);

// The server frames with [CLS]/[SEP] itself and does not return those
// positions, so frame tokens at either end of a request are stripped and
// answered with zero vectors.
class RemoteEncoder final : public Encoder {
 public:
  RemoteEncoder(std::string url, const Vocabulary& vocab, int timeout_seconds = 30);

  std::size_t dim() const override { return dim_; }
  std::vector<Vector> encode(std::span<const TokenId> tokens,
                             std::span<const std::size_t> masked) const override;
  Vector sentence_vector(std::span<const TokenId> content) const override;
  bool frame_vectors_available() const override { return false; }

 private:
  std::string url_;
  const Vocabulary* vocab_;
  int timeout_;
  std::size_t dim_ = 0;
};

// Forward-only causal LM. Returned words outside the local vocabulary are
// dropped before renormalization.
class RemoteCausalLM final : public CausalLM {
 public:
  RemoteCausalLM(std::string url, const Vocabulary& vocab, int timeout_seconds = 30);

  Direction direction() const override { return Direction::kForward; }
  std::vector<Candidate> next_token_distribution(
      std::span<const TokenId> context, std::size_t top_k) const override;
  // The server defines the averaging; `terminal` is not forwarded.
  double sequence_nll(std::span<const TokenId> tokens, bool terminal) const override;

 private:
  std::string url_;
  const Vocabulary* vocab_;
  int timeout_;
};

class RemoteKeywordExtractor final : public KeywordExtractor {
 public:
  RemoteKeywordExtractor(std::string url, const Vocabulary& vocab,
                         std::size_t max_keywords = 3, int timeout_seconds = 30);

  std::vector<Keyword> extract(const Sentence& s) const override;
  std::size_t max_keywords() const override { return max_keywords_; }

 private:
  std::string url_;
  const Vocabulary* vocab_;
  std::size_t max_keywords_;
  int timeout_;
};

}  // namespace pmctg
