#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ratg/error.hpp"

namespace ratg {

class GeneratorError : public Error {
 public:
  using Error::Error;
};

/// Source of generated tokens. Each call receives the full current prompt
/// and returns the next token, or nullopt at end of stream.
class TokenGenerator {
 public:
  virtual ~TokenGenerator() = default;
  virtual std::optional<std::string> next_token(const std::string& prompt) = 0;
};

/// Decodes one line of a token script: \n \t \r \s (space) \\ and \@ are
/// recognized. Throws ArgumentError on any other escape.
std::string unescape_token(std::string_view line);
std::string escape_token(std::string_view token);

/// Replays a fixed token list and records every prompt it was given.
///
/// Script files hold one token per line; empty lines are ignored. A block
///
///     @when <text>
///     ...tokens...
///     @otherwise
///     ...tokens...
///     @end
///
/// picks its first or second token list depending on whether the prompt
/// contains <text> when the block is reached.
class ScriptedGenerator : public TokenGenerator {
 public:
  explicit ScriptedGenerator(std::vector<std::string> tokens);
  /// Throws ArgumentError naming the line of a malformed script.
  static ScriptedGenerator parse(std::string_view script);
  static ScriptedGenerator from_file(const std::filesystem::path& path);

  std::optional<std::string> next_token(const std::string& prompt) override;

  const std::vector<std::string>& prompts() const noexcept { return prompts_; }
  /// Which branch each @when block took, in order (true for the first list).
  const std::vector<bool>& branches_taken() const noexcept { return branches_; }

 private:
  struct Segment {
    std::optional<std::string> condition;
    std::vector<std::string> tokens;
    std::vector<std::string> otherwise;
  };

  ScriptedGenerator() = default;

  std::vector<Segment> segments_;
  std::size_t segment_ = 0;
  std::size_t index_ = 0;
  std::optional<bool> chosen_;
  std::vector<std::string> prompts_;
  std::vector<bool> branches_;
};

struct RemoteGeneratorOptions {
  std::string endpoint;  // http(s)://host[:port]/path
  std::string token;     // sent as a bearer credential when non-empty
  double temperature = 0.0;
  int max_retries = 3;
  std::chrono::milliseconds timeout{60000};
  std::chrono::milliseconds retry_delay{250};
};

/// Calls an HTTP completion endpoint once per token. The request body is
/// {"prompt", "max_new_tokens": 1, "temperature"}; the response may carry the
/// token as "token", "content" or "choices"[0]["text"]. An empty token or a
/// true "stop"/"done" field ends the stream.
class RemoteGenerator : public TokenGenerator {
 public:
  /// Throws ConfigError on an unusable endpoint.
  explicit RemoteGenerator(RemoteGeneratorOptions options);
  /// Throws GeneratorError once retries are exhausted.
  std::optional<std::string> next_token(const std::string& prompt) override;
  int requests_sent() const noexcept { return requests_; }

 private:
  RemoteGeneratorOptions options_;
  std::string base_;
  std::string path_;
  int requests_ = 0;
};

}  // namespace ratg
