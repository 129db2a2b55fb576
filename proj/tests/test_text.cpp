#include <algorithm>
#include <sstream>

#include "fixtures.hpp"
#include "pmctg/error.hpp"

using namespace pmctg;
using namespace pmctg::testing;

TEST_CASE("reserved ids come first") {
  Vocabulary v;
  CHECK(v.size() == kNumSpecials);
  CHECK(v.surface(kBos) == "<s>");
  CHECK(v.surface(kEos) == "</s>");
  CHECK(v.surface(kMask) == "[MASK]");
  CHECK(v.surface(kCls) == "[CLS]");
  CHECK(v.surface(kSep) == "[SEP]");
  CHECK(v.surface(kUnk) == "<unk>");
  CHECK(v.add("cat") == kNumSpecials);
  CHECK(v.add("cat") == kNumSpecials);
  CHECK(v.lookup("dog") == kUnk);
  CHECK_FALSE(v.find("dog").has_value());
  CHECK_THROWS_AS(v.surface(999), Error);
}

TEST_CASE("vocabulary round-trips through text") {
  auto c = corpus_of({"b a a", "c a"});
  std::stringstream ss;
  c.vocab.write(ss);
  auto back = Vocabulary::read(ss);
  CHECK(back.size() == c.vocab.size());
  CHECK(back.hash() == c.vocab.hash());
  for (TokenId id = kNumSpecials; id < back.size(); ++id) {
    CHECK(back.surface(id) == c.vocab.surface(id));
    CHECK(back.count(id) == c.vocab.count(id));
  }
}

TEST_CASE("corpus ids follow frequency then surface") {
  auto c = corpus_of({"b a a", "c a", "b"});
  CHECK(c.vocab.surface(kNumSpecials) == "a");
  CHECK(c.vocab.surface(kNumSpecials + 1) == "b");
  CHECK(c.vocab.surface(kNumSpecials + 2) == "c");
  CHECK(c.vocab.count(*c.vocab.find("a")) == 3);
  CHECK(c.sentences.size() == 3);
}

TEST_CASE("rare words collapse to unk") {
  std::vector<std::string> lines{"a a b", "a c"};
  auto c = build_corpus(lines, false, 2);
  CHECK_FALSE(c.vocab.find("b").has_value());
  CHECK(c.sentences[0][2] == kUnk);
  CHECK(c.vocab.count(kUnk) == 2);
}

TEST_CASE("empty corpus and empty input are rejected") {
  std::vector<std::string> blank{"", "   "};
  CHECK_THROWS_WITH_AS(build_corpus(blank, false, 1), doctest::Contains("no sentences"), Error);
  auto c = corpus_of({"a b"});
  try {
    tokenize("  ", c.vocab, false);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyInput);
    CHECK(e.is_contract_violation());
  }
}

TEST_CASE("tokenize maps unknown words and lowercases on request") {
  auto c = corpus_of({"the cat"});
  auto s = tokenize("The cat sat", c.vocab, true);
  REQUIRE(s.size() == 3);
  CHECK(s[0] == *c.vocab.find("the"));
  CHECK(s[2] == kUnk);
  CHECK(detokenize(s, c.vocab) == "the cat <unk>");
}

TEST_CASE("sentence keyword positions are sorted and validated") {
  Sentence s({10, 11, 12}, {2, 0, 2});
  CHECK(s.keyword_positions() == std::vector<std::size_t>{0, 2});
  CHECK(s.is_keyword(0));
  CHECK_FALSE(s.is_keyword(1));
  CHECK(s.keyword_tokens() == std::vector<TokenId>{10, 12});
  CHECK_THROWS_AS(Sentence({10}, {1}), Error);
}

TEST_CASE("insert shifts keyword positions at or after the index") {
  Sentence s({10, 11, 12}, {0, 2});
  auto t = apply_edit(s, EditKind::kInsert, 2, TokenId{20});
  CHECK(std::vector<TokenId>(t.tokens().begin(), t.tokens().end()) ==
        std::vector<TokenId>{10, 11, 20, 12});
  CHECK(t.keyword_positions() == std::vector<std::size_t>{0, 3});
  auto front = apply_edit(s, EditKind::kInsert, 0, TokenId{20});
  CHECK(front.keyword_positions() == std::vector<std::size_t>{1, 3});
  auto back = apply_edit(s, EditKind::kInsert, 3, TokenId{20});
  CHECK(back.keyword_positions() == std::vector<std::size_t>{0, 2});
  CHECK_THROWS_AS(apply_edit(s, EditKind::kInsert, 4, TokenId{20}), Error);
  CHECK_THROWS_AS(apply_edit(s, EditKind::kInsert, 1, std::nullopt), Error);
}

TEST_CASE("delete shifts keyword positions after the index") {
  Sentence s({10, 11, 12, 13}, {0, 3});
  auto t = apply_edit(s, EditKind::kDelete, 1, std::nullopt);
  CHECK(t.keyword_positions() == std::vector<std::size_t>{0, 2});
  CHECK(t.size() == 3);
}

TEST_CASE("keywords cannot be replaced or deleted") {
  Sentence s({10, 11}, {1});
  for (auto kind : {EditKind::kReplace, EditKind::kDelete}) {
    try {
      apply_edit(s, kind, 1, TokenId{30});
      FAIL("expected constraint violation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kConstraintViolation);
    }
  }
  auto r = apply_edit(s, EditKind::kReplace, 0, TokenId{30});
  CHECK(r[0] == 30);
  CHECK(r.keyword_positions() == std::vector<std::size_t>{1});
}

TEST_CASE("deleting the last token underflows") {
  Sentence s({10}, {});
  try {
    apply_edit(s, EditKind::kDelete, 0, std::nullopt);
    FAIL("expected underflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnderflow);
  }
}

TEST_CASE("random legal edits keep every keyword in order") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<TokenId> keywords{100, 101, 102};
    Sentence s(keywords, {0, 1, 2});
    for (int step = 0; step < 60; ++step) {
      const auto i = static_cast<std::size_t>(uniform01(rng) * s.size());
      const double u = uniform01(rng);
      const TokenId tok = static_cast<TokenId>(200 + step);
      if (u < 0.4 || s.is_keyword(i)) {
        s = apply_edit(s, EditKind::kInsert, i + (u < 0.2 ? 0 : 1), tok);
      } else if (u < 0.7) {
        s = apply_edit(s, EditKind::kReplace, i, tok);
      } else if (s.size() > 1) {
        s = apply_edit(s, EditKind::kDelete, i, std::nullopt);
      }
      REQUIRE(s.keyword_tokens() == keywords);
      for (auto p : s.keyword_positions()) REQUIRE(p < s.size());
    }
  }
}

TEST_CASE("edit kinds round-trip through names") {
  for (auto k : {EditKind::kInsert, EditKind::kReplace, EditKind::kDelete}) {
    CHECK(edit_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(edit_kind_from_string("swap"), Error);
}
