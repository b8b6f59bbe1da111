#include "ratg/eval.hpp"

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "ratg/process.hpp"

namespace ratg {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string GoToolchain::executable() const {
  auto found = find_executable(go);
  if (!found) throw EnvironmentError("go toolchain not found: " + go);
  return found->string();
}

std::string_view to_string(CompileStatus s) {
  return s == CompileStatus::compiled ? "compiled" : "compile_error";
}

std::string_view to_string(TestStatus s) {
  switch (s) {
    case TestStatus::passed: return "passed";
    case TestStatus::failed: return "failed";
    case TestStatus::skipped: return "skipped";
    case TestStatus::timeout: return "timeout";
  }
  return "failed";
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    auto line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  return lines;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, std::string_view data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("cannot write " + p.string());
}

fs::path unique_temp_path(std::string_view stem) {
  static std::mt19937_64 rng{std::random_device{}()};
  for (int i = 0; i < 100; ++i) {
    auto p = fs::temp_directory_path() / (std::string(stem) + "-" + std::to_string(rng() % 1000000000ULL));
    if (!fs::exists(p)) return p;
  }
  throw IoError("cannot pick a temporary file name");
}

class RemoveOnExit {
 public:
  explicit RemoveOnExit(fs::path p) : path_(std::move(p)) {}
  RemoveOnExit(const RemoveOnExit&) = delete;
  RemoveOnExit& operator=(const RemoveOnExit&) = delete;
  ~RemoveOnExit() {
    std::error_code ec;
    fs::remove(path_, ec);
  }

 private:
  fs::path path_;
};

std::string duration_flag(std::chrono::milliseconds d) { return std::to_string(d.count()) + "ms"; }

}  // namespace

std::vector<Diagnostic> parse_diagnostics(std::string_view output) {
  static const std::regex with_col(R"(^(\S[^:]*\.go):(\d+):(\d+): (.*)$)");
  static const std::regex without_col(R"(^(\S[^:]*\.go):(\d+): (.*)$)");
  std::vector<Diagnostic> out;
  for (auto line_view : split_lines(output)) {
    std::string line(line_view);
    std::smatch m;
    Diagnostic d;
    if (std::regex_match(line, m, with_col)) {
      d = {m[1], std::stoi(m[2]), std::stoi(m[3]), m[4]};
    } else if (std::regex_match(line, m, without_col)) {
      d = {m[1], std::stoi(m[2]), 0, m[3]};
    } else {
      continue;
    }
    if (d.file.starts_with("./")) d.file.erase(0, 2);
    out.push_back(std::move(d));
  }
  return out;
}

CompileResult compile_check(const std::string& test_file, const fs::path& package_dir, const std::string& file_name,
                            const GoToolchain& go, std::chrono::milliseconds timeout) {
  if (!file_name.ends_with("_test.go") || file_name.find('/') != std::string::npos)
    throw ArgumentError("compile_check needs a bare _test.go file name, got " + file_name);
  if (!fs::is_directory(package_dir)) throw IoError("not a directory: " + package_dir.string());
  const std::string exe = go.executable();

  const fs::path placed = package_dir / file_name;
  if (fs::exists(placed)) throw ArgumentError("refusing to overwrite " + placed.string());
  write_file(placed, test_file);
  RemoveOnExit cleanup(placed);

  std::vector<std::string> args{"test"};
  args.insert(args.end(), go.test_flags.begin(), go.test_flags.end());
  args.insert(args.end(), {"-vet=off", "-run", "^$", "."});
  CommandResult run = run_command(exe, args, package_dir, timeout, go.env);

  CompileResult result;
  result.candidate = file_name;
  result.output = run.output;
  if (run.exit_code == 0 && !run.timed_out) {
    result.status = CompileStatus::compiled;
    return result;
  }
  result.status = CompileStatus::compile_error;
  result.diagnostics = parse_diagnostics(run.output);
  if (result.diagnostics.empty()) {
    std::string message = run.timed_out ? "compilation timed out" : trim(run.output);
    if (message.empty()) message = "toolchain exited with status " + std::to_string(run.exit_code);
    result.diagnostics.push_back({"", 0, 0, message});
  }
  return result;
}

double compile_rate(const std::vector<CompileResult>& results) {
  if (results.empty()) {
    spdlog::warn("compile rate of an empty candidate list is reported as 0");
    return 0.0;
  }
  auto compiled = std::count_if(results.begin(), results.end(),
                                [](const CompileResult& r) { return r.status == CompileStatus::compiled; });
  return static_cast<double>(compiled) / static_cast<double>(results.size());
}

std::size_t CoverageReport::total_lines() const {
  std::size_t n = 0;
  for (const auto& [_, lines] : files) n += lines.size();
  return n;
}

std::size_t CoverageReport::covered_lines() const {
  std::size_t n = 0;
  for (const auto& [_, lines] : files)
    for (const auto& [__, covered] : lines) n += covered ? 1 : 0;
  return n;
}

std::optional<bool> CoverageReport::line_covered(std::string_view file_name, int line) const {
  for (const auto& [path, lines] : files) {
    bool match = path == file_name ||
                 (path.size() > file_name.size() && path.ends_with(file_name) &&
                  path[path.size() - file_name.size() - 1] == '/');
    if (!match) continue;
    if (auto it = lines.find(line); it != lines.end()) return it->second;
  }
  return std::nullopt;
}

namespace {

bool parse_int(std::string_view s, long long& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

CoverageReport parse_coverprofile(std::string_view text) {
  CoverageReport report;
  auto lines = split_lines(text);
  std::size_t i = 0;
  while (i < lines.size() && trim(lines[i]).empty()) ++i;
  if (i == lines.size() || !lines[i].starts_with("mode:")) throw CoverageParseError(i + 1, "expected a mode: line");
  for (++i; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (trim(line).empty()) continue;
    const std::size_t number = i + 1;
    // path:sl.sc,el.ec stmts count; the path itself may contain ':'
    auto sp2 = line.rfind(' ');
    if (sp2 == std::string_view::npos) throw CoverageParseError(number, "missing fields");
    auto sp1 = line.rfind(' ', sp2 - 1);
    auto colon = line.rfind(':', sp1 == std::string_view::npos ? 0 : sp1);
    if (sp1 == std::string_view::npos || sp2 == 0 || colon == std::string_view::npos || colon == 0)
      throw CoverageParseError(number, "missing fields");
    std::string_view range = line.substr(colon + 1, sp1 - colon - 1);
    long long stmts = 0, count = 0;
    if (!parse_int(line.substr(sp1 + 1, sp2 - sp1 - 1), stmts) || !parse_int(line.substr(sp2 + 1), count) ||
        stmts < 0 || count < 0)
      throw CoverageParseError(number, "bad statement or hit count");
    auto comma = range.find(',');
    if (comma == std::string_view::npos) throw CoverageParseError(number, "bad block range");
    auto parse_pos = [&](std::string_view pos, long long& ln, long long& col) {
      auto dot = pos.find('.');
      if (dot == std::string_view::npos || !parse_int(pos.substr(0, dot), ln) || !parse_int(pos.substr(dot + 1), col) ||
          ln < 1 || col < 1)
        throw CoverageParseError(number, "bad block range");
    };
    long long sl = 0, sc = 0, el = 0, ec = 0;
    parse_pos(range.substr(0, comma), sl, sc);
    parse_pos(range.substr(comma + 1), el, ec);
    if (el < sl) throw CoverageParseError(number, "block ends before it starts");
    auto& file = report.files[std::string(line.substr(0, colon))];
    for (long long l = sl; l <= el; ++l) {
      bool& covered = file[static_cast<int>(l)];
      covered = covered || count > 0;
    }
  }
  const auto total = report.total_lines();
  report.line_coverage = total == 0 ? 0.0 : static_cast<double>(report.covered_lines()) / static_cast<double>(total);
  return report;
}

bool TestRunResult::all_passed() const {
  if (package_error || timed_out || tests.empty()) return false;
  return std::all_of(tests.begin(), tests.end(), [](const auto& kv) {
    return kv.second == TestStatus::passed || kv.second == TestStatus::skipped;
  });
}

TestRunResult run_tests_with_coverage(const fs::path& package_dir, const TestRunOptions& options,
                                      const GoToolchain& go) {
  if (!fs::is_directory(package_dir)) throw IoError("not a directory: " + package_dir.string());
  const std::string exe = go.executable();

  const fs::path profile = unique_temp_path("ratg-cover");
  RemoveOnExit cleanup(profile);

  std::vector<std::string> args{"test"};
  args.insert(args.end(), go.test_flags.begin(), go.test_flags.end());
  args.insert(args.end(), {"-json", "-vet=off", "-timeout", duration_flag(options.timeout)});
  if (!options.run_filter.empty()) args.insert(args.end(), {"-run", options.run_filter});
  if (options.coverage) args.push_back("-coverprofile=" + profile.string());
  args.push_back(".");
  // The runner enforces the test deadline itself; the extra minute covers the build.
  CommandResult run = run_command(exe, args, package_dir, options.timeout + std::chrono::minutes(1), go.env);

  TestRunResult result;
  result.exit_code = run.exit_code;
  result.timed_out = run.timed_out;

  std::set<std::string> started;
  bool build_failed = false;
  std::string text;
  for (auto line : split_lines(run.output)) {
    json event = json::parse(line, nullptr, false);
    if (!line.starts_with("{") || event.is_discarded() || !event.is_object()) {
      text.append(line).push_back('\n');
      continue;
    }
    const std::string action = event.value("Action", "");
    const std::string test = event.value("Test", "");
    if (event.contains("Output") && event["Output"].is_string()) text += event["Output"].get<std::string>();
    if (action == "build-fail" || event.contains("FailedBuild")) build_failed = true;
    if (test.empty() || test.find('/') != std::string::npos) continue;
    if (action == "run") started.insert(test);
    else if (action == "pass") result.tests[test] = TestStatus::passed;
    else if (action == "fail") result.tests[test] = TestStatus::failed;
    else if (action == "skip") result.tests[test] = TestStatus::skipped;
  }
  result.output = text;
  if (text.find("panic: test timed out after") != std::string::npos) result.timed_out = true;
  if (text.find("[build failed]") != std::string::npos || text.find("[setup failed]") != std::string::npos)
    build_failed = true;

  const TestStatus unfinished = result.timed_out ? TestStatus::timeout : TestStatus::failed;
  for (const auto& name : started) result.tests.try_emplace(name, unfinished);
  if (result.timed_out) {
    // the runner reports the test that hit the deadline as failed
    if (auto running = text.find("running tests:"); running != std::string::npos)
      for (auto& [name, status] : result.tests)
        if (status == TestStatus::failed && text.find("\t" + name + " (", running) != std::string::npos)
          status = TestStatus::timeout;
  }

  if (build_failed) {
    auto diags = parse_diagnostics(text);
    result.package_error = "build failed" + (diags.empty() ? std::string() : ": " + diags.front().message);
  } else if (run.exit_code != 0 && !result.timed_out &&
             std::none_of(result.tests.begin(), result.tests.end(),
                          [](const auto& kv) { return kv.second == TestStatus::failed; })) {
    result.package_error = "test runner exited with status " + std::to_string(run.exit_code);
  }
  for (const auto& name : options.expected_tests) result.tests.try_emplace(name, unfinished);
  if (result.package_error)
    for (auto& [_, status] : result.tests)
      if (status == TestStatus::passed) status = TestStatus::failed;

  if (options.coverage && !build_failed && fs::exists(profile)) result.coverage = parse_coverprofile(read_file(profile));
  return result;
}

std::string test_function_name(std::string_view source) {
  static const std::regex decl(R"((?:^|\n)func (Test\w*)\s*\()");
  std::string s(source);
  std::smatch m;
  if (std::regex_search(s, m, decl)) return m[1];
  return {};
}

std::string rename_test_function(std::string_view source, std::string_view from, std::string_view to) {
  std::string s(source);
  const std::string needle = "func " + std::string(from) + "(";
  std::size_t pos = 0;
  while ((pos = s.find(needle, pos)) != std::string::npos) {
    if (pos == 0 || s[pos - 1] == '\n') {
      s.replace(pos + 5, from.size(), to);
      return s;
    }
    pos += needle.size();
  }
  throw ArgumentError("no declaration of " + std::string(from));
}

std::string sha256_file(const fs::path& path) {
  const std::string data = read_file(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed for " + path.string());
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::map<std::string, std::string> directory_checksums(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    out[fs::relative(entry.path(), dir).generic_string()] = sha256_file(entry.path());
  }
  return out;
}

json to_json(const CompileResult& r) {
  json diags = json::array();
  for (const auto& d : r.diagnostics)
    diags.push_back({{"file", d.file}, {"line", d.line}, {"column", d.column}, {"message", d.message}});
  return {{"candidate", r.candidate}, {"status", to_string(r.status)}, {"diagnostics", diags}};
}

json to_json(const CoverageReport& r) {
  json files = json::object();
  for (const auto& [path, lines] : r.files) {
    json arr = json::array();
    for (const auto& [line, covered] : lines) arr.push_back({line, covered});
    files[path] = arr;
  }
  return {{"line_coverage", r.line_coverage},
          {"covered_lines", r.covered_lines()},
          {"total_lines", r.total_lines()},
          {"files", files}};
}

}  // namespace ratg
