#include <json.hpp>

#include <sstream>

#include "fixtures.hpp"
#include "pmctg/error.hpp"
#include "pmctg/trace_io.hpp"

using namespace pmctg;
using namespace pmctg::testing;

namespace {

SearchResult small_run(Task task) {
  const auto& b = toy_bundle();
  auto config = SearchConfig::defaults_for(task);
  config.max_steps = 6;
  config.seed = 3;
  Backends be{&b.forward, &b.backward, &b.encoder};
  if (task == Task::kHard) {
    std::vector<std::string> kw{"girl", "song"};
    return search(make_hard_input(b.vocab, kw), be, config);
  }
  TfIdfKeywordExtractor ex(b.vocab);
  return search(make_soft_input(b.vocab, "the girl sings a song .", &ex), be, config);
}

}  // namespace

TEST_CASE("trace records: header, one per step, result") {
  const auto& b = toy_bundle();
  for (auto task : {Task::kHard, Task::kSoft}) {
    auto r = small_run(task);
    std::stringstream ss;
    write_trace(ss, r.trace, b.vocab, 4);
    std::vector<nlohmann::json> records;
    std::string line;
    while (std::getline(ss, line)) records.push_back(nlohmann::json::parse(line));
    REQUIRE(records.size() == r.trace.steps.size() + 2);
    CHECK(records.front()["record"] == "header");
    CHECK(records.front()["line"] == 4);
    CHECK(records.front()["task"] == std::string(to_string(task)));
    CHECK(records.front()["initial"] == detokenize(r.trace.initial, b.vocab));
    for (std::size_t i = 0; i < r.trace.steps.size(); ++i) {
      const auto& j = records[i + 1];
      const auto& st = r.trace.steps[i];
      CHECK(j["record"] == "step");
      CHECK(j["step"] == i + 1);
      CHECK(j["position"] == st.position);
      CHECK(j["sentence"] == detokenize(st.sentence, b.vocab));
      CHECK(j["proposals"].size() == st.proposals.size());
      CHECK(j["objective"].get<double>() == doctest::Approx(r.trace.objectives[i + 1]));
      CHECK(j["scores"].contains("flu"));
      CHECK(j["scores"].contains("sem") == (task == Task::kSoft));
    }
    CHECK(records.back()["record"] == "result");
    CHECK(records.back()["best_index"] == r.trace.best_index);
    CHECK(records.back()["sentence"] == detokenize(r.best, b.vocab));
  }
}

TEST_CASE("pretty printing counts records and rejects garbage") {
  const auto& b = toy_bundle();
  auto r = small_run(Task::kHard);
  std::stringstream ss;
  write_trace(ss, r.trace, b.vocab);
  std::stringstream out;
  CHECK(print_trace(ss, out) == r.trace.steps.size() + 2);
  CHECK(out.str().find("best #") != std::string::npos);
  std::stringstream bad("{not json\n");
  std::stringstream sink;
  CHECK_THROWS_AS(print_trace(bad, sink), Error);
  std::stringstream unknown("{\"record\":\"mystery\"}\n");
  CHECK_THROWS_AS(print_trace(unknown, sink), Error);
}
