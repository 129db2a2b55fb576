#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "pmctg/encoder.hpp"
#include "pmctg/keywords.hpp"
#include "pmctg/language_model.hpp"
#include "pmctg/text.hpp"

namespace pmctg {

// Hard: keywords-to-sentence (fluency + edit). Soft: paraphrasing (all four).
enum class Task { kHard, kSoft };

std::string_view to_string(Task task);
Task task_from_string(std::string_view name);

struct ScoreWeights {
  double flu = 1.0;
  double edit = 1.0;
  double sem = 1.0;
  double exp = 1.0;

  void validate() const;
  // Sum of the weights the task actually combines.
  double active_sum(Task task) const;
};

// Raw values as computed, normalized values in [0, 1] with higher = better.
struct ComponentScores {
  double flu_raw = 0.0;   // mean NLL, lower is better
  double edit_raw = 0.0;  // mean adjacent impact
  double sem_key = 0.0;
  double sem_sen = 0.0;
  double sem_raw = 0.0;   // sem_key + sem_sen
  double exp_raw = 0.0;   // 1 - BLEU(x*, x0)

  double flu = 0.0;
  double edit = 0.0;
  double sem = 0.0;
  double exp = 0.0;
};

double fluency(const CausalLM& lm, const Sentence& s);

// Mean impact around an edit in the post-edit sentence `after`.
// kReplace / kInsert: `position` is the index of the new token x' and the
// score is the mean impact of x' on its two neighbours.
// kDelete: `position` is the index the removed token occupied; its former
// neighbours, now at position - 1 and position, score each other.
// Missing neighbours fall back to the [CLS]/[SEP] frame.
double edit_rationality(const Encoder& encoder, const Sentence& after, EditKind kind,
                        std::size_t position);

// Sentence-level analogue used for final selection: mean over content
// positions of the mean impact each token has on its two neighbours.
double sentence_edit_score(const Encoder& encoder, const Sentence& s);

struct SemanticSimilarity {
  double key = 0.0;
  double sen = 0.0;
  double total = 0.0;
};

// Precomputed x0 side of the similarity so repeated scoring against the
// same source does not re-encode it.
struct SemanticReference {
  std::vector<Vector> keyword_vectors;  // unmasked contextual vectors at ik
  Vector sentence;
};

SemanticReference make_semantic_reference(const Encoder& encoder,
                                          std::span<const Keyword> keywords,
                                          const Sentence& x0);
SemanticSimilarity semantic_similarity(const Encoder& encoder,
                                       const SemanticReference& reference,
                                       const Sentence& xstar);
// key: mean over keywords of the best cosine against any x* position
// (0 when there are no keywords); sen: cosine of sentence vectors.
SemanticSimilarity semantic_similarity(const Encoder& encoder,
                                       std::span<const Keyword> keywords,
                                       const Sentence& x0, const Sentence& xstar);

double diversity(const Sentence& x0, const Sentence& xstar);

// Min-max normalizes each component across `components` (a constant
// component becomes 0.5, fluency is flipped), stores the normalized values
// back, and returns the weighted sum per entry.
std::vector<double> combine(const ScoreWeights& weights, Task task,
                            std::span<ComponentScores> components);

}  // namespace pmctg
