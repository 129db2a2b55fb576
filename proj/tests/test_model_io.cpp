#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "pmctg/error.hpp"

using namespace pmctg;
using namespace pmctg::testing;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("pmctg_model_io_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("bundles round-trip and retraining is byte-identical") {
  auto corpus = build_corpus(toy_corpus({500, 0.1, 9}), false, 1);
  auto a = scratch("a"), b = scratch("b");
  save_bundle(train_bundle(corpus), a);
  save_bundle(train_bundle(corpus), b);
  for (const char* f : {"vocab.tsv", "forward.knlm", "backward.knlm", "encoder.ppmi"}) {
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  auto loaded = load_bundle(a);
  auto fresh = train_bundle(corpus);
  CHECK(loaded.vocab.hash() == fresh.vocab.hash());
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    auto ctx = random_tokens(fresh.vocab, 2, rng);
    CHECK(loaded.forward.distribution(ctx) == fresh.forward.distribution(ctx));
    CHECK(loaded.backward.distribution(ctx) == fresh.backward.distribution(ctx));
  }
  for (TokenId id = 0; id < fresh.vocab.size(); ++id) {
    CHECK(loaded.encoder.static_vector(id) == fresh.encoder.static_vector(id));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("missing or mismatched files fail cleanly") {
  try {
    load_bundle(scratch("missing"));
    FAIL("expected I/O error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
    CHECK_FALSE(e.is_contract_violation());
  }
  auto dir = scratch("swap");
  save_bundle(train_bundle(build_corpus(toy_corpus({100, 0.1, 1}), false, 1)), dir);
  fs::rename(dir / "forward.knlm", dir / "tmp");
  fs::rename(dir / "backward.knlm", dir / "forward.knlm");
  fs::rename(dir / "tmp", dir / "backward.knlm");
  CHECK_THROWS_AS(load_bundle(dir), Error);
  fs::remove_all(dir);
}
