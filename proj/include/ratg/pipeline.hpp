#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "ratg/config.hpp"
#include "ratg/focal.hpp"
#include "ratg/generators.hpp"
#include "ratg/mutation.hpp"
#include "ratg/report.hpp"

namespace ratg {

/// Layout of one run directory:
///
///     config.json                 resolved configuration
///     ledger.jsonl                one event per line
///     manifest.json               extracted focal units
///     workspace/                  project copy used for generation
///     candidates/<id>_<k>.json    candidate with its fetch log
///     candidates/<id>_<k>_test.go assembled test file
///     evaluation/                 compile, test and coverage results
///     mutation/                   mutants per package and totals
///     report.json, report.txt     aggregate report
class RunDirectory {
 public:
  explicit RunDirectory(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path manifest() const { return root_ / "manifest.json"; }
  std::filesystem::path workspace() const { return root_ / "workspace"; }
  std::filesystem::path candidates() const { return root_ / "candidates"; }
  std::filesystem::path evaluation() const { return root_ / "evaluation"; }
  std::filesystem::path mutation() const { return root_ / "mutation"; }

  /// Appends {time, command, level, event, detail} to the ledger.
  void record(const std::string& command, const std::string& level, const std::string& event,
              const std::string& detail = "");
  /// Events recorded at level "error" by this process.
  int errors() const noexcept { return errors_; }

 private:
  std::filesystem::path root_;
  int errors_ = 0;
};

/// Copies a Go project, leaving out VCS metadata, `skip` and existing test
/// files.
void copy_project(const std::filesystem::path& from, const std::filesystem::path& to,
                  const std::filesystem::path& skip);

nlohmann::json to_json(const FocalUnit& unit);

/// `<unit id>_<k>`, the stem of every per-candidate file.
std::string candidate_stem(const std::string& unit_id, int k);

using GeneratorFactory = std::function<std::unique_ptr<TokenGenerator>(const FocalUnit& unit, int k)>;
/// Token scripts `<script_dir>/<id>_<k>.tokens` or the remote endpoint.
GeneratorFactory default_generator_factory(const RunConfig& config);

std::vector<FocalUnit> cmd_extract(const RunConfig& config, RunDirectory& run);

struct GenerateSummary {
  int generated = 0;
  int skipped = 0;  // already present in the run directory
  int failed = 0;   // recorded in the ledger
};
GenerateSummary cmd_generate(const RunConfig& config, RunDirectory& run, const GeneratorFactory& factory);

EvalReport cmd_evaluate(const RunConfig& config, RunDirectory& run);
MutationSummary cmd_mutate(const RunConfig& config, RunDirectory& run);
/// Aggregates this run with any `other_runs` (one project each).
AggregateReport cmd_report(const RunConfig& config, RunDirectory& run,
                           const std::vector<std::filesystem::path>& other_runs = {});
AggregateReport cmd_run(const RunConfig& config, RunDirectory& run, const GeneratorFactory& factory);

}  // namespace ratg
