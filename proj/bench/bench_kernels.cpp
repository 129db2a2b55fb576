#include <benchmark/benchmark.h>

#include "pmctg/model_io.hpp"
#include "pmctg/perturbed_masking.hpp"
#include "pmctg/search.hpp"
#include "pmctg/synthetic.hpp"

using namespace pmctg;

namespace {

const ModelBundle& bundle() {
  static const ModelBundle b = train_bundle(build_corpus(toy_corpus({5000, 0.1, 1}), false, 1));
  return b;
}

Sentence sentence_of_length(std::size_t n) {
  Rng rng(n);
  std::vector<TokenId> ids;
  while (ids.size() < n) {
    const auto s = tokenize(toy_sentence(rng), bundle().vocab, false);
    for (auto t : s.tokens()) {
      if (ids.size() < n) ids.push_back(t);
    }
  }
  return Sentence(ids);
}

void BM_EditScores(benchmark::State& state) {
  const auto s = sentence_of_length(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(edit_scores(bundle().encoder, s));
}

void BM_EditScoresSerial(benchmark::State& state) {
  const auto s = sentence_of_length(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(edit_scores_serial(bundle().encoder, s));
}

struct Batch {
  std::vector<TaskInput> inputs;
  std::vector<std::uint64_t> seeds;
  SearchConfig config;
  Backends backends;
};

Batch make_batch(std::size_t n) {
  Batch b;
  Rng rng(17);
  for (std::size_t i = 0; i < n; ++i) {
    b.inputs.push_back(make_hard_input(bundle().vocab, sample_keywords(toy_sentence(rng), 3, rng)));
    b.seeds.push_back(mix_seed(17, i));
  }
  b.config = SearchConfig::defaults_for(Task::kHard);
  b.config.max_steps = 20;
  b.config.direction = CandidateDirection::kBidirectionalProduct;
  b.backends = {&bundle().forward, &bundle().backward, &bundle().encoder};
  return b;
}

void BM_RunBatch(benchmark::State& state) {
  const auto b = make_batch(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_batch(b.inputs, b.backends, b.config, b.seeds));
  }
}

void BM_RunBatchSerial(benchmark::State& state) {
  const auto b = make_batch(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_batch_serial(b.inputs, b.backends, b.config, b.seeds));
  }
}

}  // namespace

BENCHMARK(BM_EditScores)->Arg(8)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EditScoresSerial)->Arg(8)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_RunBatch)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunBatchSerial)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
