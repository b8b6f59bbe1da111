#pragma once

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <random>
#include <string>

#include "ratg/process.hpp"

namespace ratg::testing {

namespace fs = std::filesystem;

inline fs::path fixtures_dir() { return RATG_FIXTURES_DIR; }
inline fs::path test_data_dir() { return RATG_TEST_DATA_DIR; }

/// RATG_GOPLS, then gopls on PATH, then the bundled stand-in.
inline std::optional<std::string> language_server() {
  if (const char* env = std::getenv("RATG_GOPLS"); env && *env) {
    if (find_executable(env)) return std::string(env);
  }
  if (auto p = find_executable("gopls")) return p->string();
#ifdef RATG_GOLSP_PATH
  if (find_executable(RATG_GOLSP_PATH)) return std::string(RATG_GOLSP_PATH);
#endif
  return std::nullopt;
}

inline bool go_available() { return find_executable("go").has_value(); }

/// A private directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "ratg-test") {
    std::random_device rd;
    path_ = fs::temp_directory_path() / (prefix + "-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

/// A writable copy of the fixture module.
class FixtureCopy : public TempDir {
 public:
  FixtureCopy() : TempDir("ratg-fixture") {
    fs::copy(fixtures_dir(), path(), fs::copy_options::recursive);
  }
};

}  // namespace ratg::testing
