#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ratg/error.hpp"

namespace ratg {

/// The Go toolchain is missing or unusable; distinct from a compile error.
class EnvironmentError : public Error {
 public:
  using Error::Error;
};

class CoverageParseError : public Error {
 public:
  CoverageParseError(std::size_t line, const std::string& what)
      : Error("cover profile line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct GoToolchain {
  std::string go = "go";
  std::map<std::string, std::string> env = {{"GOTOOLCHAIN", "local"}, {"GOPROXY", "off"}, {"GOFLAGS", "-mod=mod"}};
  std::vector<std::string> test_flags = {"-count=1"};

  /// Throws EnvironmentError when `go` cannot be resolved.
  std::string executable() const;
};

struct Diagnostic {
  std::string file;
  int line = 0;
  int column = 0;
  std::string message;
  bool operator==(const Diagnostic&) const = default;
};

enum class CompileStatus { compiled, compile_error };
std::string_view to_string(CompileStatus s);

struct CompileResult {
  std::string candidate;
  CompileStatus status = CompileStatus::compile_error;
  std::vector<Diagnostic> diagnostics;
  std::string output;
};

/// `file:line:col: message` (column optional) lines of toolchain output.
std::vector<Diagnostic> parse_diagnostics(std::string_view output);

/// Places `test_file` into `package_dir` as `file_name` (a `_test.go` name),
/// builds the package's tests without running any, and removes the file.
CompileResult compile_check(const std::string& test_file, const std::filesystem::path& package_dir,
                            const std::string& file_name, const GoToolchain& go = {},
                            std::chrono::milliseconds timeout = std::chrono::minutes(5));

/// compiled / total; 0 with a warning for an empty list.
double compile_rate(const std::vector<CompileResult>& results);

struct CoverageReport {
  /// Profile path -> line -> covered.
  std::map<std::string, std::map<int, bool>> files;
  double line_coverage = 0.0;

  std::size_t total_lines() const;
  std::size_t covered_lines() const;
  /// Looks a line up by file base name; nullopt if the line was not profiled.
  std::optional<bool> line_covered(std::string_view file_name, int line) const;
};

/// Expands every block to its line range; a line is covered if any block
/// containing it executed. Throws CoverageParseError naming the bad line.
CoverageReport parse_coverprofile(std::string_view text);

enum class TestStatus { passed, failed, skipped, timeout };
std::string_view to_string(TestStatus s);

struct TestRunResult {
  std::map<std::string, TestStatus> tests;  // top-level tests only
  CoverageReport coverage;
  bool timed_out = false;
  std::optional<std::string> package_error;  // build failure or runner crash
  int exit_code = 0;
  std::string output;

  bool all_passed() const;
};

struct TestRunOptions {
  std::string run_filter;  // -run regex; empty runs all
  std::chrono::milliseconds timeout{120000};
  /// Tests that must appear; missing ones are failed (timeout when the run
  /// timed out).
  std::vector<std::string> expected_tests;
  bool coverage = true;
};

/// `go test -json -coverprofile` over one package directory.
TestRunResult run_tests_with_coverage(const std::filesystem::path& package_dir, const TestRunOptions& options = {},
                                      const GoToolchain& go = {});

/// Name of the first `func TestXxx(` in `source`, or empty.
std::string test_function_name(std::string_view source);
/// Renames the declaration `func <from>(` to `func <to>(`.
std::string rename_test_function(std::string_view source, std::string_view from, std::string_view to);

/// SHA-256 of a file's bytes, hex encoded.
std::string sha256_file(const std::filesystem::path& path);
/// Relative path -> SHA-256 for every regular file under `dir`.
std::map<std::string, std::string> directory_checksums(const std::filesystem::path& dir);

nlohmann::json to_json(const CompileResult& r);
nlohmann::json to_json(const CoverageReport& r);

}  // namespace ratg
