#include "pmctg/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "pmctg/error.hpp"
#include "pmctg/metrics.hpp"
#include "pmctg/perturbed_masking.hpp"

namespace pmctg {

std::string_view to_string(Task task) {
  return task == Task::kHard ? "hard" : "soft";
}

Task task_from_string(std::string_view name) {
  if (name == "hard" || name == "k2s") return Task::kHard;
  if (name == "soft" || name == "paraphrase") return Task::kSoft;
  throw Error(ErrorCode::kInvalidArgument, "unknown task " + std::string(name));
}

void ScoreWeights::validate() const {
  for (double w : {flu, edit, sem, exp}) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::kInvalidArgument, "score weights must be finite and >= 0");
    }
  }
  if (flu + edit + sem + exp <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "at least one score weight must be > 0");
  }
}

double ScoreWeights::active_sum(Task task) const {
  return task == Task::kHard ? flu + edit : flu + edit + sem + exp;
}

double fluency(const CausalLM& lm, const Sentence& s) {
  return sequence_nll(lm, s, false);
}

namespace {

bool frame_target_ok(const Encoder& encoder, std::size_t target, std::size_t framed_size) {
  return encoder.frame_vectors_available() || (target != 0 && target + 1 != framed_size);
}

// Mean of the impact terms whose target the encoder can represent.
double mean_impact(const Encoder& encoder, std::span<const TokenId> framed,
                   std::initializer_list<std::pair<std::size_t, std::size_t>> terms) {
  double sum = 0.0;
  int count = 0;
  for (const auto& [source, target] : terms) {
    if (!frame_target_ok(encoder, target, framed.size())) continue;
    sum += impact(encoder, framed, source, target);
    ++count;
  }
  return count ? sum / count : 0.0;
}

}  // namespace

double edit_rationality(const Encoder& encoder, const Sentence& after, EditKind kind,
                        std::size_t position) {
  const auto framed = frame(after);
  switch (kind) {
    case EditKind::kReplace:
    case EditKind::kInsert: {
      if (position >= after.size()) {
        throw Error(ErrorCode::kOutOfRange, "edit position outside edited sentence");
      }
      const std::size_t f = position + 1;
      return mean_impact(encoder, framed, {{f, f + 1}, {f, f - 1}});
    }
    case EditKind::kDelete: {
      if (position > after.size()) {
        throw Error(ErrorCode::kOutOfRange, "deletion gap outside edited sentence");
      }
      const std::size_t left = position;  // framed index of the old x_{i-1}
      const std::size_t right = position + 1;
      return mean_impact(encoder, framed, {{left, right}, {right, left}});
    }
  }
  return 0.0;
}

double sentence_edit_score(const Encoder& encoder, const Sentence& s) {
  if (s.empty()) throw Error(ErrorCode::kEmptyInput, "edit score of empty sentence");
  const auto impacts = neighbour_impacts(encoder, s);
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double sum = 0.0;
    int count = 0;
    for (const auto& term : {impacts.on_left[i], impacts.on_right[i]}) {
      if (term) {
        sum += *term;
        ++count;
      }
    }
    total += count ? sum / count : 0.0;
  }
  return total / static_cast<double>(s.size());
}

SemanticReference make_semantic_reference(const Encoder& encoder,
                                          std::span<const Keyword> keywords,
                                          const Sentence& x0) {
  SemanticReference ref;
  if (!keywords.empty()) {
    const auto vectors = encoder.encode(frame(x0), {});
    for (const auto& k : keywords) {
      if (k.index >= x0.size()) {
        throw Error(ErrorCode::kOutOfRange, "keyword index outside source sentence");
      }
      ref.keyword_vectors.push_back(vectors[k.index + 1]);
    }
  }
  ref.sentence = encoder.sentence_vector(x0.tokens());
  return ref;
}

SemanticSimilarity semantic_similarity(const Encoder& encoder,
                                       const SemanticReference& reference,
                                       const Sentence& xstar) {
  SemanticSimilarity out;
  if (!reference.keyword_vectors.empty()) {
    const auto vectors = encoder.encode(frame(xstar), {});
    double sum = 0.0;
    for (const auto& kv : reference.keyword_vectors) {
      double best = -1.0;
      for (std::size_t i = 1; i + 1 < vectors.size(); ++i) {
        best = std::max(best, cosine(kv, vectors[i]));
      }
      sum += best;
    }
    out.key = sum / static_cast<double>(reference.keyword_vectors.size());
  }
  out.sen = cosine(reference.sentence, encoder.sentence_vector(xstar.tokens()));
  out.total = out.key + out.sen;
  return out;
}

SemanticSimilarity semantic_similarity(const Encoder& encoder,
                                       std::span<const Keyword> keywords,
                                       const Sentence& x0, const Sentence& xstar) {
  return semantic_similarity(encoder, make_semantic_reference(encoder, keywords, x0),
                             xstar);
}

double diversity(const Sentence& x0, const Sentence& xstar) {
  return 1.0 - bleu(xstar, x0);
}

std::vector<double> combine(const ScoreWeights& weights, Task task,
                            std::span<ComponentScores> components) {
  if (components.empty()) return {};
  auto normalized = [&](double ComponentScores::*raw) {
    std::vector<double> values;
    values.reserve(components.size());
    for (const auto& c : components) values.push_back(c.*raw);
    return min_max_normalize(values);
  };
  const auto flu = normalized(&ComponentScores::flu_raw);
  const auto edit = normalized(&ComponentScores::edit_raw);
  const auto sem = normalized(&ComponentScores::sem_raw);
  const auto exp = normalized(&ComponentScores::exp_raw);

  std::vector<double> out(components.size());
  for (std::size_t i = 0; i < components.size(); ++i) {
    auto& c = components[i];
    c.flu = 1.0 - flu[i];
    c.edit = edit[i];
    c.sem = sem[i];
    c.exp = exp[i];
    out[i] = weights.flu * c.flu + weights.edit * c.edit;
    if (task == Task::kSoft) out[i] += weights.sem * c.sem + weights.exp * c.exp;
  }
  return out;
}

}  // namespace pmctg
