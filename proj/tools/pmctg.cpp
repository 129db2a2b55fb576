// pmctg: train builtin backends, run keyword-to-sentence and paraphrase
// searches, evaluate outputs and compare position policies.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pmctg/compare.hpp"
#include "pmctg/error.hpp"
#include "pmctg/keywords.hpp"
#include "pmctg/metrics.hpp"
#include "pmctg/model_io.hpp"
#include "pmctg/remote.hpp"
#include "pmctg/search.hpp"
#include "pmctg/synthetic.hpp"
#include "pmctg/trace_io.hpp"

namespace {

using namespace pmctg;

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  return out;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t") == std::string::npos;
}

// Flags shared by the search commands.
struct SearchFlags {
  std::string model_dir;
  std::string server_url;
  std::string vocab_path;
  std::optional<std::size_t> steps;
  std::size_t top_k = 50;
  std::uint64_t seed = 0;
  double lambda_flu = 1.0;
  double lambda_edit = 1.0;
  double lambda_sem = 1.0;
  double lambda_exp = 1.0;
  std::string direction;  // empty: backend default
  std::string positions = "pm";
  bool no_forced_insert = false;
  bool lowercase = false;
  int jobs = 0;
  int timeout = 30;
};

void add_search_flags(CLI::App* cmd, SearchFlags& f) {
  cmd->add_option("--model", f.model_dir, "Directory written by train-lm");
  cmd->add_option("--server-url", f.server_url,
                  "Model server base URL (falls back to PMCTG_SERVER_URL)");
  cmd->add_option("--vocab", f.vocab_path,
                  "Vocabulary file for remote backends (default: <model>/vocab.tsv)");
  cmd->add_option("--steps", f.steps, "Search steps (default 100 for k2s, 50 for paraphrase)");
  cmd->add_option("--top-k", f.top_k, "Candidate list size")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--lambda-flu", f.lambda_flu, "Fluency weight");
  cmd->add_option("--lambda-edit", f.lambda_edit, "Edit rationality weight");
  cmd->add_option("--lambda-sem", f.lambda_sem, "Semantic similarity weight (soft task)");
  cmd->add_option("--lambda-exp", f.lambda_exp, "Expression diversity weight (soft task)");
  cmd->add_option("--direction", f.direction, "Candidate source: forward | bidirectional")
      ->check(CLI::IsMember({"forward", "bidirectional"}));
  cmd->add_option("--positions", f.positions, "Edit position policy: pm | uniform")
      ->check(CLI::IsMember({"pm", "uniform"}));
  cmd->add_flag("--no-forced-insert", f.no_forced_insert,
                "Let keyword positions fall through to the usual action set");
  cmd->add_flag("--lowercase", f.lowercase, "Lowercase inputs before lookup");
  cmd->add_option("--jobs", f.jobs, "Concurrent searches (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--timeout", f.timeout, "Remote request timeout in seconds")
      ->check(CLI::PositiveNumber);
}

// Owns whichever backends the flags select.
struct Runtime {
  std::optional<ModelBundle> bundle;
  std::optional<Vocabulary> remote_vocab;
  std::unique_ptr<RemoteCausalLM> remote_lm;
  std::unique_ptr<RemoteEncoder> remote_encoder;
  std::unique_ptr<KeywordExtractor> extractor;
  Backends backends;
  bool remote = false;

  const Vocabulary& vocab() const { return bundle ? bundle->vocab : *remote_vocab; }
};

void open_backends(Runtime& rt, SearchFlags& f) {
  if (f.server_url.empty()) {
    if (const char* env = std::getenv("PMCTG_SERVER_URL")) f.server_url = env;
  }
  if (!f.model_dir.empty() && f.server_url.empty()) {
    rt.bundle.emplace(load_bundle(f.model_dir));
    rt.backends = {&rt.bundle->forward, &rt.bundle->backward, &rt.bundle->encoder};
  } else if (!f.server_url.empty()) {
    rt.remote = true;
    std::string vocab_path = f.vocab_path;
    if (vocab_path.empty() && !f.model_dir.empty()) vocab_path = f.model_dir + "/vocab.tsv";
    if (vocab_path.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "remote backends need --vocab or --model");
    }
    rt.remote_vocab.emplace(load_vocabulary(vocab_path));
    rt.remote_lm = std::make_unique<RemoteCausalLM>(f.server_url, *rt.remote_vocab, f.timeout);
    rt.remote_encoder =
        std::make_unique<RemoteEncoder>(f.server_url, *rt.remote_vocab, f.timeout);
    rt.backends = {rt.remote_lm.get(), nullptr, rt.remote_encoder.get()};
  } else {
    throw Error(ErrorCode::kInvalidArgument, "choose --model or --server-url");
  }
  rt.extractor = std::make_unique<TfIdfKeywordExtractor>(rt.vocab());
}

SearchConfig make_config(Task task, const SearchFlags& f, const Runtime& rt) {
  auto config = SearchConfig::defaults_for(task);
  if (f.steps) config.max_steps = *f.steps;
  config.top_k = f.top_k;
  config.seed = f.seed;
  config.weights = {f.lambda_flu, f.lambda_edit, f.lambda_sem, f.lambda_exp};
  const auto dir = f.direction.empty() ? (rt.remote ? "forward" : "bidirectional")
                                       : f.direction;
  config.direction = dir == "forward" ? CandidateDirection::kForward
                                      : CandidateDirection::kBidirectionalProduct;
  if (config.direction == CandidateDirection::kBidirectionalProduct && !rt.backends.backward) {
    throw Error(ErrorCode::kInvalidArgument,
                "bidirectional candidates need a backward LM; use --direction forward");
  }
  config.position_policy =
      f.positions == "pm" ? PositionPolicy::kPerturbedMasking : PositionPolicy::kUniform;
  config.force_protected_insert = !f.no_forced_insert;
  config.validate();
  return config;
}

std::vector<std::string> split_keywords(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

// Runs one search per input and writes outputs (and traces) in input order.
// Blank slots pass through as blank output lines.
void run_and_write(const std::vector<std::optional<TaskInput>>& slots, Runtime& rt,
                   const SearchConfig& config, int jobs, std::ostream& out,
                   const std::string& trace_path) {
  std::vector<TaskInput> inputs;
  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> lines;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i]) continue;
    inputs.push_back(*slots[i]);
    seeds.push_back(mix_seed(config.seed, i));
    lines.push_back(i);
  }
  const auto results = run_batch(inputs, rt.backends, config, seeds, jobs);

  std::size_t next = 0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]) out << detokenize(results[next++].best, rt.vocab());
    out << '\n';
  }
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "failed to write output");

  if (!trace_path.empty()) {
    auto trace_out = open_output(trace_path);
    for (std::size_t r = 0; r < results.size(); ++r) {
      write_trace(trace_out, results[r].trace, rt.vocab(), lines[r]);
    }
    trace_out.flush();
    if (!trace_out) throw Error(ErrorCode::kIo, "failed to write " + trace_path);
  }
}

int cmd_train_lm(const std::string& corpus_path, const std::string& out_dir, int order,
                 double discount, std::size_t dim, std::size_t window,
                 std::uint64_t encoder_seed, std::uint64_t min_count, bool lowercase) {
  const auto corpus = ingest_corpus(corpus_path, lowercase, min_count);
  PpmiEncoder::Options enc;
  enc.dim = dim;
  enc.window = window;
  enc.seed = encoder_seed;
  const auto bundle = train_bundle(corpus, order, discount, enc);
  save_bundle(bundle, out_dir);

  std::cout << "sentences " << corpus.sentences.size() << '\n';
  std::cout << "vocab " << bundle.vocab.size() << '\n';
  const auto counts = bundle.forward.ngram_counts();
  for (std::size_t k = 0; k < counts.size(); ++k) {
    std::cout << "order " << (k + 1) << " ngrams " << counts[k] << '\n';
  }
  std::cout << "encoder dim " << bundle.encoder.dim() << '\n';
  return 0;
}

int cmd_eval(const std::string& hyp_path, const std::string& ref_path,
             const std::string& src_path, const std::string& judge_dir, double alpha,
             bool csv) {
  const auto hyp_lines = read_lines(hyp_path);
  const auto ref_lines = read_lines(ref_path);
  std::vector<std::string> src_lines;
  if (!src_path.empty()) src_lines = read_lines(src_path);
  if (hyp_lines.size() != ref_lines.size() ||
      (!src_path.empty() && src_lines.size() != hyp_lines.size())) {
    throw Error(ErrorCode::kInvalidArgument, "hypothesis, reference and source line counts differ");
  }
  if (hyp_lines.empty()) throw Error(ErrorCode::kEmptyInput, "nothing to evaluate");

  // Metrics compare surfaces, so every word gets its own id here; the judge
  // scores against its own vocabulary.
  Vocabulary surfaces;
  auto intern = [&](const std::string& line) {
    std::vector<TokenId> ids;
    for (const auto& w : split_whitespace(line)) ids.push_back(surfaces.add(w));
    if (ids.empty()) throw Error(ErrorCode::kEmptyInput, "empty line in evaluation input");
    return Sentence(std::move(ids), {});
  };
  std::vector<Sentence> hyps, refs, srcs;
  for (const auto& l : hyp_lines) hyps.push_back(intern(l));
  for (const auto& l : ref_lines) refs.push_back(intern(l));
  for (const auto& l : src_lines) srcs.push_back(intern(l));

  std::optional<Vocabulary> judge_vocab;
  std::optional<KneserNeyLM> judge;
  if (!judge_dir.empty()) {
    judge_vocab.emplace(load_vocabulary(judge_dir + "/vocab.tsv"));
    judge.emplace(load_kn(judge_dir + "/forward.knlm", *judge_vocab));
  }

  auto report = evaluate(hyps, refs, srcs, nullptr, alpha);
  if (judge) {
    double total = 0.0;
    for (std::size_t i = 0; i < hyp_lines.size(); ++i) {
      const auto s = tokenize(hyp_lines[i], *judge_vocab, false);
      const double nll = sequence_nll(*judge, s, true);
      report.per_sentence[i].nll = nll;
      total += nll;
    }
    report.mean.nll = total / static_cast<double>(hyp_lines.size());
  }

  const bool with_ibleu = !srcs.empty();
  const bool with_nll = judge.has_value();
  if (csv) {
    std::cout << "line,bleu,rouge1,rouge2" << (with_ibleu ? ",ibleu" : "")
              << (with_nll ? ",nll" : "") << '\n';
    auto row = [&](const std::string& label, const SentenceEval& e) {
      std::cout << label << ',' << fixed(e.bleu) << ',' << fixed(e.rouge1) << ','
                << fixed(e.rouge2);
      if (with_ibleu) std::cout << ',' << fixed(*e.ibleu);
      if (with_nll) std::cout << ',' << fixed(*e.nll);
      std::cout << '\n';
    };
    for (std::size_t i = 0; i < report.per_sentence.size(); ++i) {
      row(std::to_string(i + 1), report.per_sentence[i]);
    }
    row("mean", report.mean);
    return 0;
  }

  auto record = [&](nlohmann::ordered_json j, const SentenceEval& e) {
    j["bleu"] = e.bleu;
    j["rouge1"] = e.rouge1;
    j["rouge2"] = e.rouge2;
    if (e.ibleu) j["ibleu"] = *e.ibleu;
    if (e.nll) j["nll"] = *e.nll;
    std::cout << j.dump() << '\n';
  };
  for (std::size_t i = 0; i < report.per_sentence.size(); ++i) {
    record({{"record", "sentence"}, {"line", i + 1}}, report.per_sentence[i]);
  }
  record({{"record", "summary"}, {"count", report.per_sentence.size()}}, report.mean);
  return 0;
}

int cmd_compare(const std::string& input_path, const std::string& task_name,
                std::size_t trials, double target, SearchFlags& f, bool json) {
  Runtime rt;
  open_backends(rt, f);
  const auto task = task_from_string(task_name);
  const auto config = make_config(task, f, rt);

  std::vector<TaskInput> inputs;
  for (const auto& line : read_lines(input_path)) {
    if (blank(line)) continue;
    if (task == Task::kHard) {
      inputs.push_back(make_hard_input(rt.vocab(), split_keywords(line), f.lowercase));
    } else {
      inputs.push_back(make_soft_input(rt.vocab(), line, rt.extractor.get(), f.lowercase));
    }
  }
  const auto report = compare_searchers(inputs, rt.backends, config, trials, target,
                                        PositionPolicy::kPerturbedMasking,
                                        PositionPolicy::kUniform, f.jobs);
  if (json) {
    nlohmann::ordered_json j;
    j["runs"] = report.runs;
    j["max_steps"] = report.max_steps;
    j["target"] = report.target;
    for (const auto* m : {&report.first, &report.second}) {
      j["methods"].push_back({{"method", m->method},
                              {"median_steps", m->median_steps()},
                              {"reached", m->reached_fraction()},
                              {"mean_final_gain", m->mean_final_gain()},
                              {"mean_final_objective", m->mean_final_objective()}});
    }
    std::cout << j.dump() << '\n';
    return 0;
  }
  std::cout << "runs " << report.runs << "  max_steps " << report.max_steps << "  target "
            << fixed(report.target, 4) << '\n';
  std::printf("%-8s %13s %8s %16s %21s\n", "method", "median_steps", "reached",
              "mean_final_gain", "mean_final_objective");
  for (const auto* m : {&report.first, &report.second}) {
    std::printf("%-8s %13.1f %8.3f %16.4f %21.4f\n", m->method.c_str(), m->median_steps(),
                m->reached_fraction(), m->mean_final_gain(), m->mean_final_objective());
  }
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Constrained text generation by local edit search"};
  app.require_subcommand(1);

  // train-lm
  std::string corpus_path, out_dir;
  int order = 3;
  double discount = 0.75;
  std::size_t dim = 64, window = 2;
  std::uint64_t encoder_seed = 0x5eed, min_count = 1;
  bool train_lower = false;
  auto* train = app.add_subcommand("train-lm", "Train the builtin LMs and encoder");
  train->add_option("--corpus", corpus_path, "One sentence per line")->required();
  train->add_option("--out", out_dir, "Output model directory")->required();
  train->add_option("--order", order, "n-gram order")->check(CLI::Range(1, 10));
  train->add_option("--discount", discount, "Absolute discount")->check(CLI::Range(0.0, 1.0));
  train->add_option("--dim", dim, "Encoder dimension")->check(CLI::PositiveNumber);
  train->add_option("--window", window, "Co-occurrence window")->check(CLI::PositiveNumber);
  train->add_option("--encoder-seed", encoder_seed, "Projection seed");
  train->add_option("--min-count", min_count, "Rarer words map to <unk>");
  train->add_flag("--lowercase", train_lower, "Lowercase the corpus");

  // k2s
  SearchFlags k2s_flags;
  std::string keywords, k2s_input, k2s_output, k2s_trace = "k2s.trace.jsonl";
  bool k2s_no_trace = false;
  auto* k2s = app.add_subcommand("k2s", "Generate a sentence containing the keywords");
  add_search_flags(k2s, k2s_flags);
  auto* kw_opt = k2s->add_option("--keywords", keywords, "Comma-separated keywords");
  auto* kin_opt = k2s->add_option("--input", k2s_input, "File of keyword lists, one per line");
  kw_opt->excludes(kin_opt);
  k2s->add_option("--output", k2s_output, "Output file (default stdout)");
  k2s->add_option("--trace", k2s_trace, "Trace file");
  k2s->add_flag("--no-trace", k2s_no_trace, "Do not write a trace");

  // paraphrase
  SearchFlags para_flags;
  std::string para_input, para_output, para_trace;
  std::size_t para_keywords = 3;
  bool para_no_trace = false;
  auto* para = app.add_subcommand("paraphrase", "Paraphrase each input line");
  add_search_flags(para, para_flags);
  para->add_option("--input", para_input, "One sentence per line")->required();
  para->add_option("--output", para_output, "Output file")->required();
  para->add_option("--trace", para_trace, "Trace file (default <output>.trace.jsonl)");
  para->add_flag("--no-trace", para_no_trace, "Do not write a trace");
  para->add_option("--max-keywords", para_keywords, "Keywords protected per sentence");

  // eval
  std::string hyp_path, ref_path, src_path, judge_dir;
  double alpha = 0.9;
  bool csv = false;
  auto* ev = app.add_subcommand("eval", "Score hypotheses against references");
  ev->add_option("--hyp", hyp_path, "Hypotheses")->required();
  ev->add_option("--ref", ref_path, "References")->required();
  ev->add_option("--src", src_path, "Sources (enables iBLEU)");
  ev->add_option("--judge", judge_dir, "Model directory of the NLL judge");
  ev->add_option("--alpha", alpha, "iBLEU alpha")->check(CLI::Range(0.0, 1.0));
  ev->add_flag("--csv", csv, "Flat table instead of JSON records");

  // compare
  SearchFlags cmp_flags;
  std::string cmp_input, cmp_task = "soft";
  std::size_t trials = 1;
  double target = 0.5;
  bool cmp_json = false;
  auto* cmp = app.add_subcommand("compare", "Steps-to-target of PMCTG vs uniform positions");
  add_search_flags(cmp, cmp_flags);
  cmp->add_option("--input", cmp_input,
                  "Sentences (soft) or comma-separated keywords (hard), one per line")
      ->required();
  cmp->add_option("--task", cmp_task, "hard | soft")
      ->check(CLI::IsMember({"hard", "soft", "k2s", "paraphrase"}));
  cmp->add_option("--trials", trials, "Seeds per input")->check(CLI::PositiveNumber);
  cmp->add_option("--target", target, "Fluency gain (nats per token) that counts as reached");
  cmp->add_flag("--json", cmp_json, "One JSON object instead of a table");

  // trace
  std::string trace_file;
  auto* tr = app.add_subcommand("trace", "Pretty-print a trace file");
  tr->add_option("file", trace_file, "Trace file")->required();

  // make-corpus
  ToyCorpusOptions toy;
  std::string toy_out;
  auto* mk = app.add_subcommand("make-corpus", "Write a synthetic toy corpus");
  mk->add_option("--out", toy_out, "Output file")->required();
  mk->add_option("--sentences", toy.sentences, "Number of sentences");
  mk->add_option("--noise-rate", toy.noise_rate, "Fraction with a filler token")
      ->check(CLI::Range(0.0, 1.0));
  mk->add_option("--seed", toy.seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*train) {
    return cmd_train_lm(corpus_path, out_dir, order, discount, dim, window, encoder_seed,
                        min_count, train_lower);
  }
  if (*k2s) {
    if (keywords.empty() && k2s_input.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "k2s needs --keywords or --input");
    }
    Runtime rt;
    open_backends(rt, k2s_flags);
    const auto config = make_config(Task::kHard, k2s_flags, rt);
    std::vector<std::optional<TaskInput>> slots;
    const auto lines = k2s_input.empty() ? std::vector<std::string>{keywords}
                                         : read_lines(k2s_input);
    for (const auto& line : lines) {
      if (blank(line)) {
        slots.emplace_back();
        continue;
      }
      slots.emplace_back(make_hard_input(rt.vocab(), split_keywords(line), k2s_flags.lowercase));
    }
    const auto trace = k2s_no_trace ? std::string{} : k2s_trace;
    if (k2s_output.empty()) {
      run_and_write(slots, rt, config, k2s_flags.jobs, std::cout, trace);
    } else {
      auto out = open_output(k2s_output);
      run_and_write(slots, rt, config, k2s_flags.jobs, out, trace);
    }
    return 0;
  }
  if (*para) {
    Runtime rt;
    open_backends(rt, para_flags);
    rt.extractor = std::make_unique<TfIdfKeywordExtractor>(rt.vocab(), para_keywords);
    const auto config = make_config(Task::kSoft, para_flags, rt);
    std::vector<std::optional<TaskInput>> slots;
    for (const auto& line : read_lines(para_input)) {
      if (blank(line)) {
        slots.emplace_back();
        continue;
      }
      slots.emplace_back(
          make_soft_input(rt.vocab(), line, rt.extractor.get(), para_flags.lowercase));
    }
    const auto trace =
        para_no_trace ? std::string{}
                      : (para_trace.empty() ? para_output + ".trace.jsonl" : para_trace);
    auto out = open_output(para_output);
    run_and_write(slots, rt, config, para_flags.jobs, out, trace);
    return 0;
  }
  if (*ev) return cmd_eval(hyp_path, ref_path, src_path, judge_dir, alpha, csv);
  if (*cmp) return cmd_compare(cmp_input, cmp_task, trials, target, cmp_flags, cmp_json);
  if (*tr) {
    std::ifstream in(trace_file);
    if (!in) throw Error(ErrorCode::kIo, "cannot open " + trace_file);
    print_trace(in, std::cout);
    return 0;
  }
  if (*mk) {
    auto out = open_output(toy_out);
    for (const auto& line : toy_corpus(toy)) out << line << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "failed to write " + toy_out);
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const pmctg::Error& e) {
    std::cerr << "pmctg: " << e.what() << '\n';
    return e.is_contract_violation() ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "pmctg: " << e.what() << '\n';
    return 1;
  }
}
