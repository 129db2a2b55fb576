#include "pmctg/search.hpp"

#include <omp.h>

#include <algorithm>
#include <exception>
#include <map>

#include "pmctg/error.hpp"

namespace pmctg {

std::string_view to_string(CandidateDirection d) {
  return d == CandidateDirection::kForward ? "forward" : "bidirectional-product";
}

std::string_view to_string(PositionPolicy p) {
  return p == PositionPolicy::kPerturbedMasking ? "perturbed-masking" : "uniform";
}

SearchConfig SearchConfig::defaults_for(Task task) {
  SearchConfig config;
  config.task = task;
  config.max_steps = task == Task::kHard ? 100 : 50;
  return config;
}

void SearchConfig::validate() const {
  if (top_k == 0) throw Error(ErrorCode::kInvalidArgument, "top_k must be >= 1");
  weights.validate();
}

TaskInput make_hard_input(const Vocabulary& vocab, std::span<const std::string> keywords,
                          bool lowercase) {
  if (keywords.empty()) {
    throw Error(ErrorCode::kEmptyInput, "keyword list is empty");
  }
  TaskInput input;
  input.task = Task::kHard;
  for (const auto& raw : keywords) {
    const auto word = lowercase ? to_lower(raw) : raw;
    auto id = vocab.find(word);
    if (word.empty() || !id || is_special(*id)) {
      throw Error(ErrorCode::kOovKeyword, "keyword '" + raw + "' is not in the vocabulary");
    }
    input.tokens.push_back(*id);
  }
  return input;
}

TaskInput make_soft_input(const Vocabulary& vocab, std::string_view text,
                          const KeywordExtractor* extractor, bool lowercase) {
  TaskInput input;
  input.task = Task::kSoft;
  const auto s = tokenize(text, vocab, lowercase);
  input.tokens.assign(s.tokens().begin(), s.tokens().end());
  if (extractor) input.keywords = extractor->extract(s);
  return input;
}

Sentence initialize(const TaskInput& input) {
  if (input.tokens.empty()) {
    throw Error(ErrorCode::kEmptyInput, "task input has no tokens");
  }
  std::vector<std::size_t> protect;
  if (input.task == Task::kHard) {
    for (std::size_t i = 0; i < input.tokens.size(); ++i) protect.push_back(i);
  } else {
    for (const auto& k : input.keywords) protect.push_back(k.index);
  }
  return Sentence(input.tokens, std::move(protect));
}

SearchContext::SearchContext(const TaskInput& input, const Backends& backends,
                             const SearchConfig& config)
    : input_(&input), backends_(&backends), config_(&config), source_(initialize(input)) {
  if (!backends.forward || !backends.encoder) {
    throw Error(ErrorCode::kInvalidArgument, "search needs a forward LM and an encoder");
  }
  if (config.direction == CandidateDirection::kBidirectionalProduct && !backends.backward) {
    throw Error(ErrorCode::kInvalidArgument,
                "bidirectional candidates need a backward LM");
  }
  if (config.task == Task::kSoft) {
    reference_ = make_semantic_reference(*backends.encoder, input.keywords, source_);
  }
}

void SearchContext::score_sentence_terms(const Sentence& s, ComponentScores& out) const {
  out.flu_raw = fluency(*backends_->forward, s);
  if (config_->task == Task::kSoft) {
    const auto sim = semantic_similarity(*backends_->encoder, *reference_, s);
    out.sem_key = sim.key;
    out.sem_sen = sim.sen;
    out.sem_raw = sim.total;
    out.exp_raw = diversity(source_, s);
  }
}

ComponentScores SearchContext::sentence_components(const Sentence& s) const {
  ComponentScores out;
  score_sentence_terms(s, out);
  out.edit_raw = sentence_edit_score(*backends_->encoder, s);
  return out;
}

std::vector<Candidate> candidate_distribution(const Sentence& s, std::size_t index,
                                              bool replace, const Backends& backends,
                                              const SearchConfig& config) {
  const auto tokens = s.tokens();
  if (index > tokens.size() || (replace && index >= tokens.size())) {
    throw Error(ErrorCode::kOutOfRange, "candidate index outside sentence");
  }
  const auto left = tokens.first(index);
  const auto right = tokens.subspan(replace ? index + 1 : index);
  const std::size_t want = config.top_k + (replace ? 1 : 0);

  auto list = backends.forward->next_token_distribution(left, want);
  if (config.direction == CandidateDirection::kBidirectionalProduct) {
    const std::vector<TokenId> reversed(right.rbegin(), right.rend());
    const auto backward = backends.backward->next_token_distribution(reversed, want);
    // Tokens missing from one side's list take that side's smallest listed
    // probability.
    auto floor_of = [](const std::vector<Candidate>& l) {
      double m = 1.0;
      for (const auto& c : l) m = std::min(m, c.probability);
      return m;
    };
    const double floor_f = floor_of(list), floor_b = floor_of(backward);
    std::map<TokenId, std::pair<double, double>> joint;
    for (const auto& c : list) joint[c.token] = {c.probability, floor_b};
    for (const auto& c : backward) {
      auto [it, inserted] = joint.try_emplace(c.token, floor_f, c.probability);
      if (!inserted) it->second.second = c.probability;
    }
    list.clear();
    for (const auto& [token, p] : joint) list.push_back({token, p.first * p.second});
    std::stable_sort(list.begin(), list.end(), [](const Candidate& a, const Candidate& b) {
      return a.probability > b.probability;
    });
  }
  if (replace) {
    const TokenId incumbent = tokens[index];
    std::erase_if(list, [&](const Candidate& c) { return c.token == incumbent; });
    if (config.direction == CandidateDirection::kForward && list.size() > config.top_k) {
      list.resize(config.top_k);
    }
  }
  double total = 0.0;
  for (const auto& c : list) total += c.probability;
  if (total > 0.0) {
    for (auto& c : list) c.probability /= total;
  }
  return list;
}

namespace {

std::optional<TokenId> sample_candidate(const std::vector<Candidate>& candidates,
                                        Rng& rng) {
  if (candidates.empty()) return std::nullopt;
  std::vector<double> weights;
  weights.reserve(candidates.size());
  for (const auto& c : candidates) weights.push_back(c.probability);
  return candidates[sample_index(weights, rng)].token;
}

}  // namespace

std::vector<EditProposal> propose(const Sentence& s, std::size_t position,
                                  bool forced_insert, const SearchContext& context,
                                  Rng& rng) {
  if (position >= s.size()) {
    throw Error(ErrorCode::kOutOfRange, "edit position outside sentence");
  }
  const auto& backends = context.backends();
  const auto& config = context.config();
  const bool editable = !forced_insert && !s.is_keyword(position);

  std::vector<EditProposal> proposals;
  if (editable) {
    auto candidates = candidate_distribution(s, position, true, backends, config);
    if (auto token = sample_candidate(candidates, rng)) {
      proposals.push_back({EditKind::kReplace, position, token,
                           apply_edit(s, EditKind::kReplace, position, token), {}});
    }
  }
  {
    const std::size_t index = uniform01(rng) < 0.5 ? position : position + 1;
    auto candidates = candidate_distribution(s, index, false, backends, config);
    if (auto token = sample_candidate(candidates, rng)) {
      proposals.push_back({EditKind::kInsert, index, token,
                           apply_edit(s, EditKind::kInsert, index, token), {}});
    }
  }
  if (editable && s.size() >= 2) {
    proposals.push_back({EditKind::kDelete, position, std::nullopt,
                         apply_edit(s, EditKind::kDelete, position), {}});
  }
  if (proposals.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "no edit proposals: the language model offers no candidates");
  }

  std::vector<ComponentScores> scores(proposals.size());
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const auto& p = proposals[i];
    context.score_sentence_terms(p.result, scores[i]);
    scores[i].edit_raw =
        edit_rationality(*backends.encoder, p.result, p.kind, p.position);
  }
  const auto combined = combine(config.weights, config.task, scores);
  const auto probabilities = softmax(combined);
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    proposals[i].scores = scores[i];
    proposals[i].combined = combined[i];
    proposals[i].probability = probabilities[i];
  }
  return proposals;
}

std::vector<double> sentence_objectives(const ScoreWeights& weights, Task task,
                                        std::vector<ComponentScores> components) {
  return combine(weights, task, components);
}

void SearchTrace::finalize() {
  std::vector<ComponentScores> all;
  all.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) all.push_back(scores_at(i));
  objectives = sentence_objectives(config.weights, config.task, std::move(all));
  best_index = 0;
  for (std::size_t i = 1; i < objectives.size(); ++i) {
    if (objectives[i] > objectives[best_index]) best_index = i;
  }
}

Sentence step(const Sentence& s, const SearchContext& context, Rng& rng,
              SearchTrace& trace) {
  const auto& config = context.config();
  if (trace.steps.size() >= config.max_steps) {
    throw Error(ErrorCode::kTraceFull, "search trace already holds max_steps steps");
  }
  TraceStep record;
  if (config.position_policy == PositionPolicy::kPerturbedMasking) {
    record.p_edit = edit_scores(*context.backends().encoder, s).probabilities;
  } else {
    record.p_edit.assign(s.size(), 1.0 / static_cast<double>(s.size()));
  }
  const auto sampled = sample_position(record.p_edit, rng, s.keyword_positions(),
                                       config.force_protected_insert);
  record.position = sampled.position;
  record.forced = sampled.forced;
  record.proposals = propose(s, sampled.position, sampled.forced.has_value(), context, rng);

  std::vector<double> weights;
  for (const auto& p : record.proposals) weights.push_back(p.probability);
  record.chosen = sample_index(weights, rng);

  const auto& chosen = record.proposals[record.chosen];
  record.sentence = chosen.result;
  ComponentScores sentence_scores;
  sentence_scores.flu_raw = chosen.scores.flu_raw;
  sentence_scores.sem_key = chosen.scores.sem_key;
  sentence_scores.sem_sen = chosen.scores.sem_sen;
  sentence_scores.sem_raw = chosen.scores.sem_raw;
  sentence_scores.exp_raw = chosen.scores.exp_raw;
  sentence_scores.edit_raw = sentence_edit_score(*context.backends().encoder, record.sentence);
  record.sentence_scores = sentence_scores;

  Sentence next = record.sentence;
  trace.steps.push_back(std::move(record));
  return next;
}

SearchResult search(const TaskInput& input, const Backends& backends,
                    const SearchConfig& config) {
  config.validate();
  SearchTrace trace;
  trace.config = config;
  trace.input = input;
  SearchContext context(trace.input, backends, trace.config);
  trace.initial = context.source();
  trace.initial_scores = context.sentence_components(trace.initial);

  Rng rng(config.seed);
  Sentence current = trace.initial;
  trace.steps.reserve(config.max_steps);
  for (std::size_t i = 0; i < config.max_steps; ++i) {
    current = step(current, context, rng, trace);
  }
  trace.finalize();
  Sentence best = trace.best();
  return {std::move(best), std::move(trace)};
}

SearchResult search_baseline_uniform(const TaskInput& input, const Backends& backends,
                                     const SearchConfig& config) {
  auto uniform = config;
  uniform.position_policy = PositionPolicy::kUniform;
  return search(input, backends, uniform);
}

std::vector<SearchResult> run_batch_serial(std::span<const TaskInput> inputs,
                                           const Backends& backends,
                                           const SearchConfig& config,
                                           std::span<const std::uint64_t> seeds) {
  if (seeds.size() != inputs.size()) {
    throw Error(ErrorCode::kInvalidArgument, "run_batch needs one seed per input");
  }
  std::vector<SearchResult> out;
  out.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto job = config;
    job.seed = seeds[i];
    out.push_back(search(inputs[i], backends, job));
  }
  return out;
}

std::vector<SearchResult> run_batch(std::span<const TaskInput> inputs,
                                    const Backends& backends, const SearchConfig& config,
                                    std::span<const std::uint64_t> seeds, int jobs) {
  if (seeds.size() != inputs.size()) {
    throw Error(ErrorCode::kInvalidArgument, "run_batch needs one seed per input");
  }
  std::vector<SearchResult> out(inputs.size());
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  const auto count = static_cast<std::ptrdiff_t>(inputs.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      auto job = config;
      job.seed = seeds[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(i)] =
          search(inputs[static_cast<std::size_t>(i)], backends, job);
    } catch (...) {
#pragma omp critical(pmctg_batch_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace pmctg
