#include "pmctg/compare.hpp"

#include <algorithm>
#include <numeric>

#include "pmctg/error.hpp"

namespace pmctg {

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto mid = values.size() / 2;
  if (values.size() % 2) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

StepsToTarget steps_to_target(const SearchTrace& trace, double target) {
  const double start = trace.initial_scores.flu_raw;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    if (start - trace.scores_at(k).flu_raw >= target) return {k, true};
  }
  return {trace.config.max_steps, false};
}

double MethodSummary::median_steps() const {
  return median(std::vector<double>(steps.begin(), steps.end()));
}

double MethodSummary::reached_fraction() const {
  if (reached.empty()) return 0.0;
  return static_cast<double>(std::count(reached.begin(), reached.end(), true)) /
         static_cast<double>(reached.size());
}

double MethodSummary::mean_final_gain() const {
  if (final_gain.empty()) return 0.0;
  return std::accumulate(final_gain.begin(), final_gain.end(), 0.0) /
         static_cast<double>(final_gain.size());
}

double MethodSummary::mean_final_objective() const {
  if (final_objective.empty()) return 0.0;
  return std::accumulate(final_objective.begin(), final_objective.end(), 0.0) /
         static_cast<double>(final_objective.size());
}

ComparisonReport compare_searchers(std::span<const TaskInput> inputs,
                                   const Backends& backends, const SearchConfig& config,
                                   std::size_t trials, double target,
                                   PositionPolicy first, PositionPolicy second, int jobs) {
  if (trials == 0) throw Error(ErrorCode::kInvalidArgument, "compare needs trials >= 1");
  if (inputs.empty()) throw Error(ErrorCode::kEmptyInput, "compare needs inputs");

  std::vector<TaskInput> runs;
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t t = 0; t < trials; ++t) {
      runs.push_back(inputs[i]);
      seeds.push_back(mix_seed(config.seed, i * trials + t));
    }
  }

  ComparisonReport report;
  report.max_steps = config.max_steps;
  report.target = target;
  report.runs = runs.size();

  auto run_arm = [&](PositionPolicy policy, MethodSummary& summary) {
    auto arm = config;
    arm.position_policy = policy;
    summary.method = policy == PositionPolicy::kPerturbedMasking ? "pmctg" : "uniform";
    for (const auto& result : run_batch(runs, backends, arm, seeds, jobs)) {
      const auto hit = steps_to_target(result.trace, target);
      summary.steps.push_back(hit.steps);
      summary.reached.push_back(hit.reached);
      summary.final_gain.push_back(result.trace.initial_scores.flu_raw -
                                   result.trace.scores_at(result.trace.best_index).flu_raw);
      summary.final_objective.push_back(result.trace.best_objective());
    }
  };
  run_arm(first, report.first);
  run_arm(second, report.second);
  return report;
}

}  // namespace pmctg
