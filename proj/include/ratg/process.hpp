#pragma once

#include <sys/types.h>

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ratg/error.hpp"

namespace ratg {

class SpawnError : public Error {
 public:
  using Error::Error;
};

/// A child process with pipes on stdin and stdout; stderr is discarded or
/// inherited. The destructor kills and reaps a still-running child.
class Subprocess {
 public:
  struct Options {
    std::filesystem::path working_dir;
    std::map<std::string, std::string> extra_env;
    bool inherit_stderr = false;
  };

  /// Throws SpawnError if the executable cannot be started.
  static Subprocess spawn(const std::string& executable, const std::vector<std::string>& args,
                          const Options& options);

  Subprocess(Subprocess&& other) noexcept;
  Subprocess& operator=(Subprocess&& other) noexcept;
  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;
  ~Subprocess();

  pid_t pid() const noexcept { return pid_; }

  /// Returns false if the child's stdin is closed.
  bool write_all(std::string_view data);
  /// Reads whatever is available within `timeout`. nullopt on timeout, an
  /// empty string at end of stream.
  std::optional<std::string> read_some(std::chrono::milliseconds timeout);
  void close_stdin();
  /// Waits up to `timeout` for exit; returns the exit status if it exited.
  std::optional<int> wait_for(std::chrono::milliseconds timeout);
  void kill();

 private:
  Subprocess() = default;
  void release();

  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  std::optional<int> exit_status_;
};

struct CommandResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string output;  // stdout, interleaved with stderr when captured
};

/// Runs a command to completion, killing it after `timeout`.
CommandResult run_command(const std::string& executable, const std::vector<std::string>& args,
                          const std::filesystem::path& working_dir, std::chrono::milliseconds timeout,
                          const std::map<std::string, std::string>& extra_env = {},
                          bool capture_stderr = true);

/// Resolves `name` against PATH unless it already contains a '/'. Returns
/// nullopt when no executable file is found.
std::optional<std::filesystem::path> find_executable(const std::string& name);

}  // namespace ratg
