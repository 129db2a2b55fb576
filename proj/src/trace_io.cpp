#include "pmctg/trace_io.hpp"

#include <cstdio>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <string>

#include "pmctg/error.hpp"

namespace pmctg {

namespace {

using nlohmann::ordered_json;

ordered_json raw_scores(const ComponentScores& c, Task task) {
  ordered_json j;
  j["flu"] = c.flu_raw;
  j["edit"] = c.edit_raw;
  if (task == Task::kSoft) {
    j["sem_key"] = c.sem_key;
    j["sem_sen"] = c.sem_sen;
    j["sem"] = c.sem_raw;
    j["exp"] = c.exp_raw;
  }
  return j;
}

ordered_json normalized_scores(const ComponentScores& c, Task task) {
  ordered_json j;
  j["flu"] = c.flu;
  j["edit"] = c.edit;
  if (task == Task::kSoft) {
    j["sem"] = c.sem;
    j["exp"] = c.exp;
  }
  return j;
}

std::string fixed(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

}  // namespace

void write_trace(std::ostream& out, const SearchTrace& trace, const Vocabulary& vocab,
                 std::optional<std::size_t> line) {
  const auto& config = trace.config;
  const Task task = config.task;
  auto tag = [&](ordered_json& j) {
    if (line) j["line"] = *line;
  };

  ordered_json header;
  header["record"] = "header";
  tag(header);
  header["task"] = to_string(task);
  header["seed"] = config.seed;
  header["max_steps"] = config.max_steps;
  header["top_k"] = config.top_k;
  header["weights"] = {{"flu", config.weights.flu},
                       {"edit", config.weights.edit},
                       {"sem", config.weights.sem},
                       {"exp", config.weights.exp}};
  header["direction"] = to_string(config.direction);
  header["position_policy"] = to_string(config.position_policy);
  header["initial"] = detokenize(trace.initial, vocab);
  ordered_json keywords = ordered_json::array();
  for (auto p : trace.initial.keyword_positions()) {
    keywords.push_back({{"token", vocab.surface(trace.initial[p])}, {"index", p}});
  }
  header["keywords"] = keywords;
  header["scores"] = raw_scores(trace.initial_scores, task);
  out << header.dump() << '\n';

  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& st = trace.steps[i];
    const auto& chosen = st.proposals[st.chosen];
    ordered_json j;
    j["record"] = "step";
    tag(j);
    j["step"] = i + 1;
    j["position"] = st.position;
    j["forced"] = st.forced ? ordered_json(to_string(*st.forced)) : ordered_json(nullptr);
    j["action"] = to_string(chosen.kind);
    j["edit_index"] = chosen.position;
    j["candidate"] = chosen.candidate ? ordered_json(vocab.surface(*chosen.candidate))
                                      : ordered_json(nullptr);
    j["p_edit"] = st.p_edit;
    ordered_json proposals = ordered_json::array();
    for (const auto& p : st.proposals) {
      ordered_json pj;
      pj["action"] = to_string(p.kind);
      pj["edit_index"] = p.position;
      pj["candidate"] =
          p.candidate ? ordered_json(vocab.surface(*p.candidate)) : ordered_json(nullptr);
      pj["scores"] = raw_scores(p.scores, task);
      pj["normalized"] = normalized_scores(p.scores, task);
      pj["combined"] = p.combined;
      pj["probability"] = p.probability;
      proposals.push_back(pj);
    }
    j["proposals"] = proposals;
    j["scores"] = raw_scores(chosen.scores, task);
    j["combined"] = chosen.combined;
    j["sentence"] = detokenize(st.sentence, vocab);
    j["sentence_scores"] = raw_scores(st.sentence_scores, task);
    if (!trace.objectives.empty()) j["objective"] = trace.objectives[i + 1];
    out << j.dump() << '\n';
  }

  ordered_json result;
  result["record"] = "result";
  tag(result);
  result["best_index"] = trace.best_index;
  if (!trace.objectives.empty()) {
    result["objective"] = trace.best_objective();
    result["initial_objective"] = trace.objectives.front();
  }
  result["sentence"] = detokenize(trace.best(), vocab);
  out << result.dump() << '\n';
}

std::size_t print_trace(std::istream& in, std::ostream& out) {
  std::string line;
  std::size_t records = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat,
                  "trace record " + std::to_string(records + 1) + ": " + e.what());
    }
    ++records;
    const auto kind = j.value("record", "");
    const std::string prefix =
        j.contains("line") ? "[" + std::to_string(j["line"].get<std::size_t>()) + "] " : "";
    if (kind == "header") {
      out << prefix << "task=" << j.value("task", "") << " seed=" << j.value("seed", 0ULL)
          << " steps=" << j.value("max_steps", 0) << " top_k=" << j.value("top_k", 0)
          << " direction=" << j.value("direction", "")
          << " positions=" << j.value("position_policy", "") << '\n';
      out << prefix << "  initial: " << j.value("initial", "") << '\n';
    } else if (kind == "step") {
      out << prefix << "  " << j.value("step", 0) << ". pos " << j.value("position", 0) << ' '
          << j.value("action", "");
      if (j.contains("candidate") && !j["candidate"].is_null()) {
        out << " '" << j["candidate"].get<std::string>() << "'";
      }
      if (j.contains("forced") && !j["forced"].is_null()) out << " (forced)";
      out << "  combined=" << fixed(j.value("combined", 0.0));
      if (j.contains("objective")) out << " objective=" << fixed(j["objective"].get<double>());
      out << "  | " << j.value("sentence", "") << '\n';
    } else if (kind == "result") {
      out << prefix << "  best #" << j.value("best_index", 0);
      if (j.contains("objective")) out << " objective=" << fixed(j["objective"].get<double>());
      out << ": " << j.value("sentence", "") << '\n';
    } else {
      throw Error(ErrorCode::kFormat, "trace record of unknown kind '" + kind + "'");
    }
  }
  return records;
}

}  // namespace pmctg
