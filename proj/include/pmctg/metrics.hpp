#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pmctg/language_model.hpp"
#include "pmctg/text.hpp"

namespace pmctg {

struct BleuConfig {
  std::size_t max_order = 4;
  double epsilon = 0.1;  // numerator used for zero-match orders
  bool brevity_penalty = true;
};

// Sentence BLEU. Orders beyond the hypothesis length are skipped, so
// bleu(x, x) == 1 for any non-empty x.
double bleu(std::span<const TokenId> hyp, std::span<const TokenId> ref,
            const BleuConfig& cfg = {});
inline double bleu(const Sentence& hyp, const Sentence& ref, const BleuConfig& cfg = {}) {
  return bleu(hyp.tokens(), ref.tokens(), cfg);
}

// alpha * BLEU(gen, ref) - (1 - alpha) * BLEU(gen, src)
double ibleu(const Sentence& gen, const Sentence& ref, const Sentence& src,
             double alpha = 0.9, const BleuConfig& cfg = {});

// F1 over clipped n-gram overlap; 0 when ref has no n-grams of order n.
double rouge_n(std::span<const TokenId> hyp, std::span<const TokenId> ref,
               std::size_t n);
inline double rouge_n(const Sentence& hyp, const Sentence& ref, std::size_t n) {
  return rouge_n(hyp.tokens(), ref.tokens(), n);
}

// Mean over sentences of the per-token NLL with EOS scored. The judge
// should be trained on text disjoint from the generation backends.
double corpus_nll(const CausalLM& judge, std::span<const Sentence> sentences);

struct SentenceEval {
  double bleu = 0.0;
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  std::optional<double> ibleu;
  std::optional<double> nll;
};

struct EvalReport {
  std::vector<SentenceEval> per_sentence;
  SentenceEval mean;
};

// `sources` may be empty (no iBLEU); `judge` may be null (no NLL).
EvalReport evaluate(std::span<const Sentence> hyps, std::span<const Sentence> refs,
                    std::span<const Sentence> sources, const CausalLM* judge,
                    double alpha = 0.9, const BleuConfig& cfg = {});

}  // namespace pmctg
