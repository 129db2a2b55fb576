#pragma once

#include <span>
#include <string>
#include <vector>

#include "pmctg/search.hpp"

namespace pmctg {

// Steps until the trace first reaches `target`, where progress is the
// fluency gain NLL(x0) - NLL(x) under the search's own forward LM.
// Runs that never reach it are censored at config.max_steps.
struct StepsToTarget {
  std::size_t steps = 0;
  bool reached = false;
};
StepsToTarget steps_to_target(const SearchTrace& trace, double target);

struct MethodSummary {
  std::string method;
  std::vector<std::size_t> steps;
  std::vector<bool> reached;
  std::vector<double> final_gain;       // fluency gain of the selected sentence
  std::vector<double> final_objective;  // trace-normalized objective of it

  double median_steps() const;
  double reached_fraction() const;
  double mean_final_gain() const;
  double mean_final_objective() const;
};

struct ComparisonReport {
  std::size_t max_steps = 0;
  double target = 0.0;
  std::size_t runs = 0;
  MethodSummary first;
  MethodSummary second;
};

// Every (input, trial) pair runs under both position policies with the same
// derived seed and budget.
ComparisonReport compare_searchers(std::span<const TaskInput> inputs,
                                   const Backends& backends, const SearchConfig& config,
                                   std::size_t trials, double target,
                                   PositionPolicy first = PositionPolicy::kPerturbedMasking,
                                   PositionPolicy second = PositionPolicy::kUniform,
                                   int jobs = 0);

double median(std::vector<double> values);

}  // namespace pmctg
