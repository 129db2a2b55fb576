#include "pmctg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pmctg/error.hpp"

namespace pmctg {

namespace {

using NgramCounts = std::map<std::vector<TokenId>, std::size_t>;

NgramCounts count_ngrams(std::span<const TokenId> tokens, std::size_t n) {
  NgramCounts out;
  if (n == 0 || tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++out[std::vector<TokenId>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                               tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return out;
}

std::size_t clipped_overlap(const NgramCounts& hyp, const NgramCounts& ref) {
  std::size_t matches = 0;
  for (const auto& [gram, c] : hyp) {
    auto it = ref.find(gram);
    if (it != ref.end()) matches += std::min(c, it->second);
  }
  return matches;
}

}  // namespace

double bleu(std::span<const TokenId> hyp, std::span<const TokenId> ref,
            const BleuConfig& cfg) {
  if (hyp.empty() || ref.empty()) {
    throw Error(ErrorCode::kEmptyInput, "BLEU needs non-empty sentences");
  }
  if (cfg.max_order == 0) throw Error(ErrorCode::kInvalidArgument, "BLEU order must be >= 1");
  const auto orders = std::min(cfg.max_order, hyp.size());
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= orders; ++n) {
    const auto hyp_counts = count_ngrams(hyp, n);
    const auto ref_counts = count_ngrams(ref, n);
    const double total = static_cast<double>(hyp.size() - n + 1);
    double matches = static_cast<double>(clipped_overlap(hyp_counts, ref_counts));
    if (matches == 0.0) matches = cfg.epsilon;
    log_sum += std::log(matches / total);
  }
  double score = std::exp(log_sum / static_cast<double>(orders));
  if (cfg.brevity_penalty && hyp.size() < ref.size()) {
    score *= std::exp(1.0 - static_cast<double>(ref.size()) /
                                static_cast<double>(hyp.size()));
  }
  return std::clamp(score, 0.0, 1.0);
}

double ibleu(const Sentence& gen, const Sentence& ref, const Sentence& src,
             double alpha, const BleuConfig& cfg) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "iBLEU alpha must lie in [0, 1]");
  }
  return alpha * bleu(gen, ref, cfg) - (1.0 - alpha) * bleu(gen, src, cfg);
}

double rouge_n(std::span<const TokenId> hyp, std::span<const TokenId> ref,
               std::size_t n) {
  if (hyp.empty() || ref.empty()) {
    throw Error(ErrorCode::kEmptyInput, "ROUGE needs non-empty sentences");
  }
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "ROUGE order must be >= 1");
  if (ref.size() < n || hyp.size() < n) return 0.0;
  const double overlap =
      static_cast<double>(clipped_overlap(count_ngrams(hyp, n), count_ngrams(ref, n)));
  if (overlap == 0.0) return 0.0;
  const double recall = overlap / static_cast<double>(ref.size() - n + 1);
  const double precision = overlap / static_cast<double>(hyp.size() - n + 1);
  return 2.0 * precision * recall / (precision + recall);
}

double corpus_nll(const CausalLM& judge, std::span<const Sentence> sentences) {
  if (sentences.empty()) {
    throw Error(ErrorCode::kEmptyInput, "corpus_nll of an empty list");
  }
  double total = 0.0;
  for (const auto& s : sentences) total += sequence_nll(judge, s, true);
  return total / static_cast<double>(sentences.size());
}

EvalReport evaluate(std::span<const Sentence> hyps, std::span<const Sentence> refs,
                    std::span<const Sentence> sources, const CausalLM* judge,
                    double alpha, const BleuConfig& cfg) {
  if (hyps.size() != refs.size() || (!sources.empty() && sources.size() != hyps.size())) {
    throw Error(ErrorCode::kInvalidArgument, "evaluation inputs differ in line count");
  }
  if (hyps.empty()) throw Error(ErrorCode::kEmptyInput, "nothing to evaluate");
  EvalReport report;
  const bool with_src = !sources.empty();
  double ib = 0.0, nll = 0.0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    SentenceEval e;
    e.bleu = bleu(hyps[i], refs[i], cfg);
    e.rouge1 = rouge_n(hyps[i], refs[i], 1);
    e.rouge2 = rouge_n(hyps[i], refs[i], 2);
    if (with_src) {
      e.ibleu = ibleu(hyps[i], refs[i], sources[i], alpha, cfg);
      ib += *e.ibleu;
    }
    if (judge) {
      e.nll = sequence_nll(*judge, hyps[i], true);
      nll += *e.nll;
    }
    report.mean.bleu += e.bleu;
    report.mean.rouge1 += e.rouge1;
    report.mean.rouge2 += e.rouge2;
    report.per_sentence.push_back(e);
  }
  const double count = static_cast<double>(hyps.size());
  report.mean.bleu /= count;
  report.mean.rouge1 /= count;
  report.mean.rouge2 /= count;
  if (with_src) report.mean.ibleu = ib / count;
  if (judge) report.mean.nll = nll / count;
  return report;
}

}  // namespace pmctg
