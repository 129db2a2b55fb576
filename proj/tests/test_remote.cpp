#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <thread>

#include "fixtures.hpp"
#include "pmctg/error.hpp"
#include "pmctg/perturbed_masking.hpp"
#include "pmctg/remote.hpp"
#include "pmctg/search.hpp"

using namespace pmctg;
using namespace pmctg::testing;
using nlohmann::json;

namespace {

// In-process stand-in for the model server. Vectors encode
// (position, masked flag, length, first letter) so tests can check framing.
class FakeServer {
 public:
  std::atomic<std::size_t> reply_dim{4};
  std::atomic<int> status{200};
  std::atomic<bool> bad_keyword{false};

  FakeServer() {
    svr_.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, {{"status", "ok"}, {"masked_model", "fake-mlm"},
                  {"causal_model", "fake-lm"}, {"dim", 4}});
    });
    svr_.Post("/v1/encode", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = json::parse(req.body);
      const auto tokens = body["tokens"].get<std::vector<std::string>>();
      const auto masked = body["mask_positions"].get<std::vector<std::size_t>>();
      json vectors = json::array();
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        const bool m = std::find(masked.begin(), masked.end(), i) != masked.end();
        std::vector<double> v{static_cast<double>(i), m ? 1.0 : 0.0,
                              static_cast<double>(tokens.size()),
                              static_cast<double>(tokens[i][0])};
        v.resize(reply_dim.load(), 0.5);
        vectors.push_back(v);
      }
      reply(res, {{"vectors", vectors}, {"dim", 4}});
    });
    svr_.Post("/v1/sentence_vector", [this](const httplib::Request& req,
                                             httplib::Response& res) {
      const auto n = json::parse(req.body)["tokens"].size();
      std::vector<double> v{static_cast<double>(n), 1, 0, 0};
      v.resize(reply_dim.load(), 0.5);
      reply(res, {{"vector", v}});
    });
    svr_.Post("/v1/next_token", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = json::parse(req.body);
      last_prefix_ = body["prefix"].dump();
      // "zebra" is unknown locally, "<s>" special, "cat" duplicated.
      reply(res, {{"tokens", {"cat", "zebra", "dog", "<s>", "cat", "park"}},
                  {"logprobs", {std::log(0.4), std::log(0.2), std::log(0.2),
                                std::log(0.1), std::log(0.05), std::log(0.05)}}});
    });
    svr_.Post("/v1/nll", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, {{"nll", 1.25}});
    });
    svr_.Post("/v1/keywords", [this](const httplib::Request& req, httplib::Response& res) {
      const auto tokens = json::parse(req.body)["tokens"].get<std::vector<std::string>>();
      const std::size_t idx = tokens.size() - 1;
      reply(res, {{"keywords", {bad_keyword ? "nope" : tokens[idx]}}, {"indices", {idx}}});
    });
    port_ = svr_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { svr_.listen_after_bind(); });
    svr_.wait_until_ready();
  }

  ~FakeServer() {
    svr_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  std::string last_prefix() const { return last_prefix_; }

 private:
  void reply(httplib::Response& res, const json& j) {
    if (status != 200) {
      res.status = status;
      res.set_content("unavailable", "text/plain");
      return;
    }
    res.set_content(j.dump(), "application/json");
  }

  httplib::Server svr_;
  int port_ = 0;
  std::thread thread_;
  std::string last_prefix_;
};

Vocabulary fake_vocab() {
  return corpus_of({"the cat sat in the park", "a dog"}).vocab;
}

}  // namespace

TEST_CASE("health and encode framing") {
  FakeServer server;
  auto vocab = fake_vocab();
  auto h = query_health(server.url());
  CHECK(h.status == "ok");
  CHECK(h.dim == 4);
  RemoteEncoder enc(server.url(), vocab);
  CHECK(enc.dim() == 4);
  CHECK_FALSE(enc.frame_vectors_available());
  const auto framed = frame(sentence_of(vocab, "the cat sat"));
  const std::vector<std::size_t> mask{2};
  auto v = enc.encode(framed, mask);
  REQUIRE(v.size() == 5);
  CHECK(v[0] == Vector(4, 0.0));
  CHECK(v[4] == Vector(4, 0.0));
  CHECK(v[1][0] == 0.0);  // server index 0 is content index 0
  CHECK(v[2][1] == 1.0);  // mask shifted past [CLS]
  CHECK(v[3][1] == 0.0);
  CHECK(v[3][2] == 3.0);
  CHECK(enc.sentence_vector(sentence_of(vocab, "a dog").tokens())[0] == 2.0);
}

TEST_CASE("edit scores run over the remote encoder") {
  FakeServer server;
  auto vocab = fake_vocab();
  RemoteEncoder enc(server.url(), vocab);
  auto es = edit_scores(enc, sentence_of(vocab, "the cat sat in the park"));
  CHECK(es.scores.size() == 6);
  double sum = 0;
  for (double p : es.probabilities) sum += p;
  CHECK(std::abs(sum - 1.0) <= 1e-12);
}

TEST_CASE("dimension mismatch is reported") {
  FakeServer server;
  auto vocab = fake_vocab();
  RemoteEncoder enc(server.url(), vocab);
  server.reply_dim = 3;
  const auto framed = frame(sentence_of(vocab, "the cat"));
  try {
    enc.encode(framed, {});
    FAIL("expected dimension mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimensionMismatch);
  }
  CHECK_THROWS_AS(enc.sentence_vector(sentence_of(vocab, "cat").tokens()), Error);
}

TEST_CASE("next-token lists are filtered and renormalized") {
  FakeServer server;
  auto vocab = fake_vocab();
  RemoteCausalLM lm(server.url(), vocab);
  auto ctx = sentence_of(vocab, "the");
  std::vector<TokenId> with_bos{kBos};
  with_bos.push_back(ctx[0]);
  auto list = lm.next_token_distribution(with_bos, 10);
  CHECK(server.last_prefix() == "[\"the\"]");
  REQUIRE(list.size() == 3);
  CHECK(vocab.surface(list[0].token) == "cat");
  CHECK(list[0].probability == doctest::Approx(0.4 / 0.65));
  CHECK(list[1].probability == doctest::Approx(0.2 / 0.65));
  CHECK(list[2].probability == doctest::Approx(0.05 / 0.65));
  CHECK(lm.next_token_distribution(ctx.tokens(), 1).size() == 1);
  CHECK(lm.sequence_nll(ctx.tokens(), true) == 1.25);
  CHECK_THROWS_AS(lm.sequence_nll({}, true), Error);
}

TEST_CASE("remote keywords are checked against the sentence") {
  FakeServer server;
  auto vocab = fake_vocab();
  RemoteKeywordExtractor ex(server.url(), vocab, 2);
  auto s = sentence_of(vocab, "the cat sat");
  auto k = ex.extract(s);
  REQUIRE(k.size() == 1);
  CHECK(k[0].index == 2);
  server.bad_keyword = true;
  try {
    ex.extract(s);
    FAIL("expected format error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFormat);
  }
}

TEST_CASE("unavailable backends map to kBackendUnavailable") {
  FakeServer server;
  auto vocab = fake_vocab();
  RemoteCausalLM lm(server.url(), vocab);
  server.status = 503;
  auto s = sentence_of(vocab, "the cat");
  try {
    lm.sequence_nll(s.tokens(), false);
    FAIL("expected unavailable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBackendUnavailable);
    CHECK_FALSE(e.is_contract_violation());
  }
  server.status = 400;
  try {
    lm.sequence_nll(s.tokens(), false);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidArgument);
  }
  try {
    query_health("http://127.0.0.1:1", 2);
    FAIL("expected unreachable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBackendUnavailable);
  }
}

TEST_CASE("a forward-only search runs end to end against the server") {
  FakeServer server;
  auto vocab = fake_vocab();
  RemoteCausalLM lm(server.url(), vocab);
  RemoteEncoder enc(server.url(), vocab);
  Backends be{&lm, nullptr, &enc};
  auto config = SearchConfig::defaults_for(Task::kHard);
  config.max_steps = 5;
  std::vector<std::string> kw{"park"};
  auto r = search(make_hard_input(vocab, kw), be, config);
  CHECK(r.best.keyword_tokens() == std::vector<TokenId>{*vocab.find("park")});
  CHECK(r.trace.steps.size() == 5);
}
