#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "pmctg/error.hpp"
#include "pmctg/language_model.hpp"

using namespace pmctg;
using namespace pmctg::testing;

namespace {

// Brute-force interpolated KN for order 2, counted straight from the padded
// sentences: raw counts at the bigram level, continuation counts plus a
// uniform floor at the unigram level.
struct BigramOracle {
  std::map<std::pair<TokenId, TokenId>, double> bigram;
  std::set<TokenId> emittable;
  double d;

  BigramOracle(const Corpus& c, double discount) : d(discount) {
    for (const auto& s : c.sentences) {
      std::vector<TokenId> padded{kBos};
      padded.insert(padded.end(), s.begin(), s.end());
      padded.push_back(kEos);
      for (std::size_t i = 1; i < padded.size(); ++i) bigram[{padded[i - 1], padded[i]}] += 1;
    }
    emittable = {kEos, kUnk};
    for (TokenId id = kNumSpecials; id < c.vocab.size(); ++id) emittable.insert(id);
  }

  double continuation(TokenId w) const {
    double types = static_cast<double>(bigram.size());
    double left = 0;
    std::set<TokenId> distinct;
    for (const auto& [k, n] : bigram) {
      distinct.insert(k.second);
      if (k.second == w) left += 1;
    }
    return std::max(left - d, 0.0) / types +
           d * static_cast<double>(distinct.size()) / types /
               static_cast<double>(emittable.size());
  }

  double prob(TokenId w, TokenId v) const {
    double total = 0, followers = 0, joint = 0;
    for (const auto& [k, n] : bigram) {
      if (k.first != v) continue;
      total += n;
      followers += 1;
      if (k.second == w) joint = n;
    }
    if (total == 0) return continuation(w);
    return std::max(joint - d, 0.0) / total + d * followers / total * continuation(w);
  }
};

}  // namespace

TEST_CASE("bigram KN matches a hand count") {
  auto c = corpus_of({"a b", "a c"});
  auto lm = KneserNeyLM::train(c, 2, 0.75);
  const TokenId a = *c.vocab.find("a"), b = *c.vocab.find("b");
  const std::vector<TokenId> ctx{a};
  // P_cont(b) = (1 - .75)/5 + .75 * 4/5 / 5 = 0.17
  // P(b|a) = (1 - .75)/2 + .75 * 2/2 * 0.17 = 0.2525
  CHECK(lm.probability(b, ctx) == doctest::Approx(0.2525).epsilon(1e-12));
}

TEST_CASE("bigram KN matches the brute-force oracle on every pair") {
  auto c = corpus_of({"a b", "a c", "b c a", "c c b a", "d"});
  for (double d : {0.3, 0.75, 0.9}) {
    auto lm = KneserNeyLM::train(c, 2, d);
    BigramOracle oracle(c, d);
    std::vector<TokenId> contexts{kBos};
    for (TokenId id = kNumSpecials; id < c.vocab.size(); ++id) contexts.push_back(id);
    for (auto v : contexts) {
      for (auto w : oracle.emittable) {
        const std::vector<TokenId> ctx{v};
        CHECK(lm.probability(w, ctx) == doctest::Approx(oracle.prob(w, v)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("distributions are normalized for every order and direction") {
  const auto& bundle = toy_bundle();
  Rng rng(3);
  std::vector<std::string> lines;
  for (int i = 0; i < 300; ++i) lines.push_back(toy_sentence(rng));
  auto c = build_corpus(lines, false, 1);
  for (int order : {1, 2, 3, 4}) {
    for (auto dir : {Direction::kForward, Direction::kBackward}) {
      auto lm = KneserNeyLM::train(c, order, 0.75, dir);
      for (int t = 0; t < 50; ++t) {
        auto ctx = random_tokens(c.vocab, static_cast<std::size_t>(uniform01(rng) * 4), rng);
        auto dist = lm.distribution(ctx);
        const double sum = std::accumulate(dist.begin(), dist.end(), 0.0);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        for (TokenId id = 0; id < dist.size(); ++id) {
          if (KneserNeyLM::is_emittable(id)) {
            CHECK(dist[id] > 0.0);
          } else {
            CHECK(dist[id] == 0.0);
          }
        }
      }
    }
  }
  (void)bundle;
}

TEST_CASE("order one keeps only unigrams") {
  auto c = corpus_of({"a b", "a c"});
  auto lm = KneserNeyLM::train(c, 1);
  CHECK(lm.ngram_counts().size() == 1);
  const TokenId a = *c.vocab.find("a"), b = *c.vocab.find("b");
  const std::vector<TokenId> ctx_a{a}, ctx_b{b};
  CHECK(lm.probability(b, ctx_a) == lm.probability(b, ctx_b));
}

TEST_CASE("next-token lists are sorted, special-free and renormalized") {
  const auto& b = toy_bundle();
  auto ctx = sentence_of(b.vocab, "the old");
  auto list = b.forward.next_token_distribution(ctx.tokens(), 5);
  REQUIRE(list.size() == 5);
  double sum = 0;
  for (std::size_t i = 0; i < list.size(); ++i) {
    CHECK_FALSE(is_special(list[i].token));
    if (i) CHECK(list[i - 1].probability >= list[i].probability);
    sum += list[i].probability;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(b.forward.next_token_distribution(ctx.tokens(), 0), Error);
}

TEST_CASE("terminal NLL adds the end-of-sentence factor") {
  const auto& b = toy_bundle();
  auto s = sentence_of(b.vocab, "the cat runs .");
  const double m = static_cast<double>(s.size());
  const double open = sequence_nll(b.forward, s, false);
  const double closed = sequence_nll(b.forward, s, true);
  const double eos = b.forward.probability(kEos, s.tokens());
  CHECK(closed * (m + 1) == doctest::Approx(open * m - std::log(eos)).epsilon(1e-12));

  double manual = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    manual -= std::log(b.forward.probability(s[i], s.tokens().first(i)));
  }
  CHECK(open == doctest::Approx(manual / m).epsilon(1e-12));
}

TEST_CASE("the backward model scores reversed text") {
  const auto& b = toy_bundle();
  auto s = sentence_of(b.vocab, "the cat runs .");
  std::vector<TokenId> rev(s.tokens().rbegin(), s.tokens().rend());
  CHECK(sequence_nll(b.backward, s, true) ==
        doctest::Approx(b.backward.sequence_nll(rev, true)).epsilon(1e-15));
  CHECK(sequence_nll(b.backward, s, true) != sequence_nll(b.forward, s, true));
}

TEST_CASE("models round-trip and re-serialize identically") {
  auto c = corpus_of({"a b c", "a c", "c b a a"});
  for (auto dir : {Direction::kForward, Direction::kBackward}) {
    auto lm = KneserNeyLM::train(c, 3, 0.6, dir);
    std::stringstream first;
    lm.write(first, c.vocab);
    auto back = KneserNeyLM::read(first, c.vocab);
    CHECK(back.direction() == dir);
    CHECK(back.order() == 3);
    std::stringstream second;
    back.write(second, c.vocab);
    std::stringstream again;
    lm.write(again, c.vocab);
    CHECK(second.str() == again.str());
    Rng rng(1);
    for (int t = 0; t < 20; ++t) {
      auto ctx = random_tokens(c.vocab, 2, rng);
      CHECK(lm.distribution(ctx) == back.distribution(ctx));
    }
  }
}

TEST_CASE("a model refuses a different vocabulary") {
  auto c = corpus_of({"a b"});
  auto other = corpus_of({"a b z"});
  auto lm = KneserNeyLM::train(c, 2);
  std::stringstream ss;
  lm.write(ss, c.vocab);
  CHECK_THROWS_AS(KneserNeyLM::read(ss, other.vocab), Error);
}

TEST_CASE("training arguments are validated") {
  auto c = corpus_of({"a b"});
  CHECK_THROWS_AS(KneserNeyLM::train(c, 0), Error);
  CHECK_THROWS_AS(KneserNeyLM::train(c, 2, 0.0), Error);
  CHECK_THROWS_AS(KneserNeyLM::train(c, 2, 1.0), Error);
  Corpus empty;
  CHECK_THROWS_AS(KneserNeyLM::train(empty, 2), Error);
  auto lm = KneserNeyLM::train(c, 2);
  CHECK_THROWS_AS(lm.sequence_nll({}, false), Error);
  CHECK(lm.sequence_nll({}, true) > 0.0);
}
