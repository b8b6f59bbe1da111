#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ratg/context_store.hpp"
#include "ratg/fetcher.hpp"
#include "ratg/focal.hpp"
#include "ratg/generators.hpp"
#include "ratg/prompt.hpp"

namespace ratg {

enum class StopReason { token_cap, brace_close, generator_end };
enum class FetchOutcome { hit, miss, error };

std::string_view to_string(StopReason r);
std::string_view to_string(FetchOutcome o);

struct FetchRecord {
  std::string identifier;
  FetchOutcome outcome = FetchOutcome::miss;
  int token_index = 0;  // 0 for the seed fetch
  std::string detail;   // error text for FetchOutcome::error
  bool operator==(const FetchRecord&) const = default;
};

struct Fragment {
  std::string text;
  bool identifier = false;
  bool operator==(const Fragment&) const = default;
};

/// Splits a token into maximal runs of identifier and non-identifier
/// characters. A digit run that would begin an identifier (the buffer is
/// empty at that point) is non-identifier.
std::vector<Fragment> classify_chars(std::string_view token, bool buffer_empty);

enum class LexMode { code, number, string, raw_string, rune, line_comment, block_comment };

/// A completed identifier.
struct FlushedIdentifier {
  std::string name;
  std::size_t offset = 0;  // byte offset of its first character in test_snippet
  int token_index = 0;     // token_length when it completed
  bool selector_base = false;  // terminated by '.'
};

struct GenerationState {
  int token_length = 0;
  std::string identifier_buffer;
  std::string test_snippet;
  std::vector<FetchRecord> fetch_log;
  int brace_depth = 0;

  std::size_t initial_length = 0;
  std::vector<FlushedIdentifier> flushed;
  std::optional<std::size_t> close_offset;  // one past the brace closing the test body

  LexMode mode = LexMode::code;
  std::size_t scan_offset = 0;
  std::size_t buffer_offset = 0;
  bool escape = false;
  bool star = false;
  bool slash = false;
  bool hex_number = false;
  std::size_t number_length = 0;
  char32_t previous = 0;
};

/// State holding the initial snippet with the test body open.
GenerationState initial_state(std::string_view focal_name);

struct StepHooks {
  std::function<bool(std::string_view)> is_known;
  std::function<void(const FlushedIdentifier&, GenerationState&)> on_flush;
  /// Called for identifiers that are not known.
  std::function<FetchRecord(const FlushedIdentifier&, GenerationState&)> fetch;
};

/// Consumes one generator token: appends it to the snippet, counts it, and
/// flushes every identifier it completes. Scanning honours string, rune and
/// comment literals and stops at the brace closing the test body.
void step(GenerationState& state, std::string_view token, const StepHooks& hooks);

/// Supplies definitions during generation.
class ContextFetcher {
 public:
  virtual ~ContextFetcher() = default;
  virtual int sync(const std::filesystem::path& path, const std::string& text) = 0;
  virtual void close(const std::filesystem::path& path) = 0;
  virtual std::optional<ContextEntry> fetch(const std::string& identifier, const std::filesystem::path& path,
                                            SourcePosition position, int fetch_round) = 0;
};

/// Definitions found in any document synced through this fetcher (the scratch
/// test) are treated as misses.
class LanguageServerFetcher : public ContextFetcher {
 public:
  LanguageServerFetcher(ServerHandle& server, FetchOptions options = {})
      : server_(server), options_(std::move(options)) {}
  int sync(const std::filesystem::path& path, const std::string& text) override;
  void close(const std::filesystem::path& path) override;
  std::optional<ContextEntry> fetch(const std::string& identifier, const std::filesystem::path& path,
                                    SourcePosition position, int fetch_round) override;
  ServerHandle& server() noexcept { return server_; }

 private:
  ServerHandle& server_;
  FetchOptions options_;
};

struct GenerationConfig {
  int max_tokens = 512;
  bool fetch_enabled = true;
  std::string task_description{kDefaultTaskDescription};
  std::string scratch_file_name = "ratg_scratch_test.go";
  /// Receives (generator call index, prompt) before every generator call.
  std::function<void(int, const std::string&)> trace;
};

struct TestCandidate {
  std::string focal_id;
  std::string package_name;
  std::string package_path;
  std::string source_text;  // the test function, cut after its closing brace
  StopReason stop_reason = StopReason::generator_end;
  std::vector<FetchRecord> fetch_log;
  int token_count = 0;
  std::vector<std::string> imports;  // workspace import paths used as selector bases
  std::string final_prompt;
};

nlohmann::json to_json(const TestCandidate& c);
TestCandidate candidate_from_json(const nlohmann::json& j);

/// Runs the token loop for one focal unit. `fetcher` may be null when
/// config.fetch_enabled is false. Throws GeneratorError when the generator
/// fails.
TestCandidate generate(const FocalUnit& focal, TokenGenerator& generator, ContextFetcher* fetcher,
                       ContextStore& store, const GoModule& module, const GenerationConfig& config = {});

/// `package`, an import block with testing and `imports`, then the function.
std::string test_file_text(std::string_view package_name, const std::vector<std::string>& imports,
                           std::string_view body);

struct AssembleOptions {
  /// Executable run as `<fixer> <file>`; its stdout replaces the file text.
  std::optional<std::string> import_fixer;
  std::filesystem::path working_dir;
};

/// Complete test file for a candidate. Throws Error if the fixer fails.
std::string assemble_test_file(const TestCandidate& candidate, std::string_view package_name,
                               const AssembleOptions& options = {});

}  // namespace ratg
