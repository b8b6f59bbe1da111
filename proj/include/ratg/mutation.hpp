#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ratg/eval.hpp"
#include "ratg/focal.hpp"

namespace ratg {

enum class MutationOperator { relational_flip, arithmetic_flip, boolean_flip, increment_decrement_flip };
enum class MutantStatus { killed, survived, not_covered, compile_skipped };

std::string_view to_string(MutationOperator op);
std::string_view to_string(MutantStatus s);
MutantStatus mutant_status_from_string(std::string_view s);

struct Mutant {
  std::string id;    // "<file>@<offset>"
  std::string file;  // relative to the package directory
  ByteSpan byte_span;
  int line = 0;
  std::string original_text;
  std::string mutated_text;
  MutationOperator op = MutationOperator::relational_flip;
  std::optional<MutantStatus> status;  // unset until run
};

/// Thrown when a mutated file cannot be restored byte-identically.
class RestoreError : public Error {
 public:
  using Error::Error;
};

/// Operator sites of one Go source held in memory.
std::vector<Mutant> mutate_source(std::string_view source, const std::string& file);

/// Mutants for every non-test .go file directly in `package_dir`, ordered by
/// (file, offset, operator). Reads only.
std::vector<Mutant> micro_mutate(const std::filesystem::path& package_dir);

/// `source` with one mutant applied. Throws ArgumentError if the span does not
/// hold the mutant's original text.
std::string apply_mutant(std::string_view source, const Mutant& mutant);

struct MutationSummary {
  std::size_t total = 0;
  std::size_t killed = 0;
  std::size_t survived = 0;
  std::size_t not_covered = 0;
  std::size_t compile_skipped = 0;

  std::size_t covered() const { return killed + survived; }
  /// (killed + survived) / total, 0 when there are no mutants.
  double mutator_coverage() const;
};

MutationSummary summarize(const std::vector<Mutant>& mutants);

struct MutationOptions {
  std::string run_filter;
  std::chrono::milliseconds timeout{30000};  // per mutant test run
};

struct MutationRun {
  std::vector<Mutant> mutants;
  MutationSummary summary;
};

/// Applies each covered mutant in place, runs the package tests and restores
/// the file. Throws RestoreError if a file cannot be put back.
MutationRun mutation_run(const std::filesystem::path& package_dir, std::vector<Mutant> mutants,
                         const CoverageReport& baseline_coverage, const MutationOptions& options = {},
                         const GoToolchain& go = {});

/// Reads a mutation tool's textual summary into counts.
class MutationSummaryAdapter {
 public:
  virtual ~MutationSummaryAdapter() = default;
  virtual MutationSummary parse(std::string_view output) const = 0;
};

/// "Killed: N, Lived: N, Not covered: N" / "Timed out: N, Not viable: N"
/// summaries. Timed-out mutants count as killed, non-viable ones as
/// compile-skipped.
class GremlinsAdapter : public MutationSummaryAdapter {
 public:
  MutationSummary parse(std::string_view output) const override;
};

/// Runs `executable args... <package_dir>` and parses its output.
MutationSummary run_external_mutation(const std::string& executable, const std::vector<std::string>& args,
                                      const std::filesystem::path& package_dir,
                                      const MutationSummaryAdapter& adapter,
                                      std::chrono::milliseconds timeout = std::chrono::minutes(30));

nlohmann::json to_json(const Mutant& m);
Mutant mutant_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MutationSummary& s);

}  // namespace ratg
