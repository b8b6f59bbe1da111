#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "ratg/eval.hpp"
#include "ratg/mutation.hpp"

namespace ratg {

struct EvalReport {
  std::string project;
  double candidates = 0;
  double compiled = 0;
  double passed = 0;
  double compile_rate = 0;
  double line_coverage = 0;
  double mutants_total = 0;
  double mutants_covered = 0;
  double mutants_killed = 0;
  double mutator_coverage = 0;
};

/// Totals for one project. Counts are whole numbers here; only the Average
/// row of an aggregate carries fractional counts.
EvalReport make_eval_report(const std::string& project, const std::vector<CompileResult>& compiled,
                            std::size_t passed, double line_coverage, const MutationSummary& mutation);

struct AggregateReport {
  std::vector<EvalReport> projects;
  EvalReport average;  // arithmetic mean of every column
  std::string table;
  nlohmann::json document;
};

/// Per-project rows plus an Average row. Throws ArgumentError on an empty list.
AggregateReport aggregate_report(const std::vector<EvalReport>& projects);

nlohmann::json to_json(const EvalReport& r);
EvalReport eval_report_from_json(const nlohmann::json& j);

}  // namespace ratg
