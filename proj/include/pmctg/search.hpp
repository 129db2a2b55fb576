#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pmctg/encoder.hpp"
#include "pmctg/keywords.hpp"
#include "pmctg/language_model.hpp"
#include "pmctg/perturbed_masking.hpp"
#include "pmctg/random.hpp"
#include "pmctg/scoring.hpp"
#include "pmctg/text.hpp"

namespace pmctg {

enum class CandidateDirection { kForward, kBidirectionalProduct };
enum class PositionPolicy { kPerturbedMasking, kUniform };

std::string_view to_string(CandidateDirection d);
std::string_view to_string(PositionPolicy p);

struct SearchConfig {
  Task task = Task::kHard;
  std::size_t max_steps = 100;
  std::size_t top_k = 50;
  ScoreWeights weights;
  std::uint64_t seed = 0;
  CandidateDirection direction = CandidateDirection::kForward;
  PositionPolicy position_policy = PositionPolicy::kPerturbedMasking;
  // Sampling a keyword position always inserts next to it.
  bool force_protected_insert = true;

  // 100 steps for the hard task, 50 for the soft task, all weights 1.
  static SearchConfig defaults_for(Task task);
  // max_steps may be 0 here (empty loop); search() itself accepts it.
  void validate() const;
};

// Non-owning views of the backends; all must outlive the search.
struct Backends {
  const CausalLM* forward = nullptr;
  const CausalLM* backward = nullptr;  // required for kBidirectionalProduct
  const Encoder* encoder = nullptr;
};

struct TaskInput {
  Task task = Task::kHard;
  // Hard: the keywords in order. Soft: the original sentence x0.
  std::vector<TokenId> tokens;
  // Soft only: extracted keywords with their indices in x0.
  std::vector<Keyword> keywords;
};

// Rejects empty lists and keywords outside the vocabulary (kOovKeyword).
TaskInput make_hard_input(const Vocabulary& vocab, std::span<const std::string> keywords,
                          bool lowercase = false);
TaskInput make_soft_input(const Vocabulary& vocab, std::string_view text,
                          const KeywordExtractor* extractor, bool lowercase = false);

// Hard: keyword concatenation, every position protected. Soft: x0 with the
// keyword indices protected.
Sentence initialize(const TaskInput& input);

struct EditProposal {
  EditKind kind;
  std::size_t position;  // insertion index for kInsert, token index otherwise
  std::optional<TokenId> candidate;
  Sentence result;
  ComponentScores scores;
  double combined = 0.0;
  double probability = 0.0;
};

// Per-search state shared by propose/step: the source sentence, its
// keywords and the cached semantic reference (soft task).
class SearchContext {
 public:
  SearchContext(const TaskInput& input, const Backends& backends,
                const SearchConfig& config);

  const TaskInput& input() const { return *input_; }
  const Backends& backends() const { return *backends_; }
  const SearchConfig& config() const { return *config_; }
  const Sentence& source() const { return source_; }
  const SemanticReference* semantic_reference() const {
    return reference_ ? &*reference_ : nullptr;
  }

  // Raw components of a candidate sentence that do not depend on the edit.
  void score_sentence_terms(const Sentence& s, ComponentScores& out) const;
  // Full raw components used for final selection.
  ComponentScores sentence_components(const Sentence& s) const;

 private:
  const TaskInput* input_;
  const Backends* backends_;
  const SearchConfig* config_;
  Sentence source_;
  std::optional<SemanticReference> reference_;
};

// Candidate distribution for a token placed at `index`. For a replacement
// the token at `index` is the incumbent and is excluded.
std::vector<Candidate> candidate_distribution(const Sentence& s, std::size_t index,
                                              bool replace, const Backends& backends,
                                              const SearchConfig& config);

// Pre-implements the legal actions at `position`, one sampled candidate per
// action, scores them and fills the combined score and softmax probability.
std::vector<EditProposal> propose(const Sentence& s, std::size_t position,
                                  bool forced_insert, const SearchContext& context,
                                  Rng& rng);

struct TraceStep {
  std::size_t position = 0;
  std::optional<EditKind> forced;
  std::vector<double> p_edit;
  std::vector<EditProposal> proposals;
  std::size_t chosen = 0;
  Sentence sentence;
  ComponentScores sentence_scores;  // raw, for final selection
};

struct SearchTrace {
  SearchConfig config;
  TaskInput input;
  Sentence initial;
  ComponentScores initial_scores;
  std::vector<TraceStep> steps;

  // Filled by finalize(): objective per traced sentence (0 = initial).
  std::vector<double> objectives;
  std::size_t best_index = 0;

  std::size_t size() const { return steps.size() + 1; }
  const Sentence& sentence_at(std::size_t index) const {
    return index == 0 ? initial : steps[index - 1].sentence;
  }
  const ComponentScores& scores_at(std::size_t index) const {
    return index == 0 ? initial_scores : steps[index - 1].sentence_scores;
  }
  const Sentence& best() const { return sentence_at(best_index); }
  double best_objective() const { return objectives.at(best_index); }

  // Normalizes sentence components across the whole trace, combines them
  // and picks the earliest argmax.
  void finalize();
};

// Sentence-level objectives of `components` (normalized among themselves).
std::vector<double> sentence_objectives(const ScoreWeights& weights, Task task,
                                        std::vector<ComponentScores> components);

// One search step: position, proposals, action sample, apply, record.
Sentence step(const Sentence& s, const SearchContext& context, Rng& rng,
              SearchTrace& trace);

struct SearchResult {
  Sentence best;
  SearchTrace trace;
};

SearchResult search(const TaskInput& input, const Backends& backends,
                    const SearchConfig& config);
// Same loop with edit positions drawn uniformly.
SearchResult search_baseline_uniform(const TaskInput& input, const Backends& backends,
                                     const SearchConfig& config);

// Independent searches over shared backends; seeds[i] replaces config.seed
// for inputs[i]. The parallel version distributes jobs over OpenMP threads
// and returns results in input order.
std::vector<SearchResult> run_batch(std::span<const TaskInput> inputs,
                                    const Backends& backends, const SearchConfig& config,
                                    std::span<const std::uint64_t> seeds, int jobs = 0);
std::vector<SearchResult> run_batch_serial(std::span<const TaskInput> inputs,
                                           const Backends& backends,
                                           const SearchConfig& config,
                                           std::span<const std::uint64_t> seeds);

}  // namespace pmctg
