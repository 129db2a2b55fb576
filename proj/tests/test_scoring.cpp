#include <cmath>

#include "fixtures.hpp"
#include "pmctg/error.hpp"
#include "pmctg/keywords.hpp"
#include "pmctg/scoring.hpp"

using namespace pmctg;
using namespace pmctg::testing;

namespace {

double norm_of(const ModelBundle& b, TokenId id) { return l2_norm(b.encoder.static_vector(id)); }

}  // namespace

TEST_CASE("fluency is the open-ended mean NLL") {
  const auto& b = toy_bundle();
  auto s = sentence_of(b.vocab, "the cat sleeps .");
  CHECK(fluency(b.forward, s) == sequence_nll(b.forward, s, false));
  CHECK(fluency(b.forward, s) < fluency(b.forward, sentence_of(b.vocab, "sleeps . cat the")));
}

TEST_CASE("replace and insert rationality is the new token's mean neighbour impact") {
  const auto& b = toy_bundle();
  auto s = sentence_of(b.vocab, "the cat sleeps in the park .");
  for (std::size_t pos = 0; pos < s.size(); ++pos) {
    // Each adjacent impact of x' equals w(1) * ||e(x')||.
    const double expected = norm_of(b, s[pos]);
    CHECK(edit_rationality(b.encoder, s, EditKind::kReplace, pos) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(edit_rationality(b.encoder, s, EditKind::kInsert, pos) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK_THROWS_AS(edit_rationality(b.encoder, s, EditKind::kInsert, s.size()), Error);
}

TEST_CASE("delete rationality scores the newly adjacent pair") {
  const auto& b = toy_bundle();
  auto before = sentence_of(b.vocab, "the cat um sleeps .");
  auto after = apply_edit(before, EditKind::kDelete, 2, std::nullopt);
  const double expected = 0.5 * (norm_of(b, before[1]) + norm_of(b, before[3]));
  CHECK(edit_rationality(b.encoder, after, EditKind::kDelete, 2) ==
        doctest::Approx(expected).epsilon(1e-12));
  // Deleting the first token pairs [CLS] with the new first token.
  auto first = apply_edit(before, EditKind::kDelete, 0, std::nullopt);
  const double with_cls = 0.5 * (norm_of(b, kCls) + norm_of(b, before[1]));
  CHECK(edit_rationality(b.encoder, first, EditKind::kDelete, 0) ==
        doctest::Approx(with_cls).epsilon(1e-12));
  CHECK_THROWS_AS(edit_rationality(b.encoder, after, EditKind::kDelete, 9), Error);
}

TEST_CASE("sentence-level edit score averages adjacent impacts") {
  const auto& b = toy_bundle();
  auto s = sentence_of(b.vocab, "a dog runs");
  double expected = 0;
  for (std::size_t i = 0; i < s.size(); ++i) expected += norm_of(b, s[i]);
  CHECK(sentence_edit_score(b.encoder, s) ==
        doctest::Approx(expected / 3).epsilon(1e-12));
}

TEST_CASE("self-similarity is two with keywords and one without") {
  const auto& b = toy_bundle();
  TfIdfKeywordExtractor ex(b.vocab);
  auto s = sentence_of(b.vocab, "the young farmer sells a car .");
  auto ks = ex.extract(s);
  REQUIRE_FALSE(ks.empty());
  auto sim = semantic_similarity(b.encoder, ks, s, s);
  CHECK(sim.key == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sim.sen == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sim.total == doctest::Approx(2.0).epsilon(1e-12));
  auto none = semantic_similarity(b.encoder, {}, s, s);
  CHECK(none.key == 0.0);
  CHECK(none.total == doctest::Approx(1.0).epsilon(1e-12));
  auto other = semantic_similarity(b.encoder, ks, s, sentence_of(b.vocab, "a bird jumps ."));
  CHECK(other.total < sim.total);
}

TEST_CASE("diversity is one minus BLEU against the source") {
  const auto& b = toy_bundle();
  auto s = sentence_of(b.vocab, "the cat sleeps .");
  CHECK(diversity(s, s) == 0.0);
  CHECK(diversity(s, sentence_of(b.vocab, "a dog runs quickly")) > 0.9);
}

TEST_CASE("combine normalizes per component and flips fluency") {
  std::vector<ComponentScores> c(3);
  c[0].flu_raw = 2.0; c[0].edit_raw = 1.0; c[0].sem_raw = 5.0; c[0].exp_raw = 0.0;
  c[1].flu_raw = 4.0; c[1].edit_raw = 3.0; c[1].sem_raw = 5.0; c[1].exp_raw = 0.5;
  c[2].flu_raw = 3.0; c[2].edit_raw = 2.0; c[2].sem_raw = 5.0; c[2].exp_raw = 1.0;
  ScoreWeights w{1.0, 2.0, 1.0, 0.5};
  auto hard = combine(w, Task::kHard, c);
  CHECK(c[0].flu == 1.0);
  CHECK(c[1].flu == 0.0);
  CHECK(c[2].flu == 0.5);
  CHECK(c[0].sem == 0.5);  // constant component
  CHECK(hard[0] == doctest::Approx(1.0 + 2.0 * 0.0));
  CHECK(hard[1] == doctest::Approx(0.0 + 2.0 * 1.0));
  CHECK(hard[2] == doctest::Approx(0.5 + 2.0 * 0.5));
  auto soft = combine(w, Task::kSoft, c);
  CHECK(soft[0] == doctest::Approx(1.0 + 0.0 + 0.5 + 0.0));
  CHECK(soft[1] == doctest::Approx(0.0 + 2.0 + 0.5 + 0.25));
  CHECK(soft[2] == doctest::Approx(0.5 + 1.0 + 0.5 + 0.5));
  CHECK(combine(w, Task::kSoft, std::span<ComponentScores>{}).empty());
}

TEST_CASE("weights and task names are validated") {
  CHECK_THROWS_AS((ScoreWeights{-1, 1, 1, 1}.validate()), Error);
  CHECK_THROWS_AS((ScoreWeights{0, 0, 0, 0}.validate()), Error);
  CHECK_THROWS_AS((ScoreWeights{NAN, 1, 1, 1}.validate()), Error);
  CHECK_NOTHROW(ScoreWeights{}.validate());
  CHECK(ScoreWeights{}.active_sum(Task::kHard) == 2.0);
  CHECK(ScoreWeights{}.active_sum(Task::kSoft) == 4.0);
  CHECK(task_from_string("k2s") == Task::kHard);
  CHECK(task_from_string("paraphrase") == Task::kSoft);
  CHECK_THROWS_AS(task_from_string("summarize"), Error);
}
