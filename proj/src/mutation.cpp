#include "ratg/mutation.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include "ratg/go_lexer.hpp"
#include "ratg/process.hpp"

namespace ratg {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view to_string(MutationOperator op) {
  switch (op) {
    case MutationOperator::relational_flip: return "relational_flip";
    case MutationOperator::arithmetic_flip: return "arithmetic_flip";
    case MutationOperator::boolean_flip: return "boolean_flip";
    case MutationOperator::increment_decrement_flip: return "increment_decrement_flip";
  }
  return "relational_flip";
}

std::string_view to_string(MutantStatus s) {
  switch (s) {
    case MutantStatus::killed: return "killed";
    case MutantStatus::survived: return "survived";
    case MutantStatus::not_covered: return "not_covered";
    case MutantStatus::compile_skipped: return "compile_skipped";
  }
  return "killed";
}

MutantStatus mutant_status_from_string(std::string_view s) {
  for (auto st : {MutantStatus::killed, MutantStatus::survived, MutantStatus::not_covered,
                  MutantStatus::compile_skipped})
    if (to_string(st) == s) return st;
  throw ArgumentError("unknown mutant status: " + std::string(s));
}

namespace {

MutationOperator operator_from_string(std::string_view s) {
  for (auto op : {MutationOperator::relational_flip, MutationOperator::arithmetic_flip,
                  MutationOperator::boolean_flip, MutationOperator::increment_decrement_flip})
    if (to_string(op) == s) return op;
  throw ArgumentError("unknown mutation operator: " + std::string(s));
}

bool ends_operand(const go::Token& t) {
  switch (t.kind) {
    case go::TokenKind::identifier:
    case go::TokenKind::number:
    case go::TokenKind::rune:
    case go::TokenKind::string:
    case go::TokenKind::raw_string:
      return true;
    case go::TokenKind::op:
      return t.text == ")" || t.text == "]" || t.text == "}";
    default:
      return false;
  }
}

bool is_string(const go::Token& t) {
  return t.kind == go::TokenKind::string || t.kind == go::TokenKind::raw_string;
}

std::optional<std::pair<std::string, MutationOperator>> flip(std::string_view text) {
  using M = MutationOperator;
  if (text == "==") return {{"!=", M::relational_flip}};
  if (text == "!=") return {{"==", M::relational_flip}};
  if (text == "<") return {{">=", M::relational_flip}};
  if (text == ">=") return {{"<", M::relational_flip}};
  if (text == ">") return {{"<=", M::relational_flip}};
  if (text == "<=") return {{">", M::relational_flip}};
  if (text == "+") return {{"-", M::arithmetic_flip}};
  if (text == "-") return {{"+", M::arithmetic_flip}};
  if (text == "++") return {{"--", M::increment_decrement_flip}};
  if (text == "--") return {{"++", M::increment_decrement_flip}};
  if (text == "true") return {{"false", M::boolean_flip}};
  if (text == "false") return {{"true", M::boolean_flip}};
  return std::nullopt;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool write_file(const fs::path& p, std::string_view data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.close();
  return static_cast<bool>(out);
}

}  // namespace

std::vector<Mutant> mutate_source(std::string_view source, const std::string& file) {
  std::vector<go::Token> tokens;
  for (const auto& t : go::tokenize(source))
    if (t.kind != go::TokenKind::comment) tokens.push_back(t);

  std::vector<Mutant> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    const bool candidate = t.kind == go::TokenKind::op ||
                           (t.kind == go::TokenKind::identifier && (t.text == "true" || t.text == "false"));
    if (!candidate) continue;
    auto f = flip(t.text);
    if (!f) continue;
    if (f->second == MutationOperator::boolean_flip && i > 0 && tokens[i - 1].text == ".") continue;
    if (f->second == MutationOperator::arithmetic_flip) {
      if (i == 0 || !ends_operand(tokens[i - 1])) continue;  // unary
      if (is_string(tokens[i - 1]) || (i + 1 < tokens.size() && is_string(tokens[i + 1]))) continue;
    }
    Mutant m;
    m.id = file + "@" + std::to_string(t.begin);
    m.file = file;
    m.byte_span = {t.begin, t.end};
    m.line = static_cast<int>(go::line_of(source, t.begin));
    m.original_text = std::string(t.text);
    m.mutated_text = f->first;
    m.op = f->second;
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<Mutant> micro_mutate(const fs::path& package_dir) {
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(package_dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.ends_with(".go") && !name.ends_with("_test.go")) files.push_back(name);
  }
  std::sort(files.begin(), files.end());
  std::vector<Mutant> out;
  for (const auto& name : files) {
    auto ms = mutate_source(read_file(package_dir / name), name);
    out.insert(out.end(), std::make_move_iterator(ms.begin()), std::make_move_iterator(ms.end()));
  }
  std::stable_sort(out.begin(), out.end(), [](const Mutant& a, const Mutant& b) {
    return std::tie(a.file, a.byte_span.start, a.op) < std::tie(b.file, b.byte_span.start, b.op);
  });
  return out;
}

std::string apply_mutant(std::string_view source, const Mutant& mutant) {
  const auto& span = mutant.byte_span;
  if (span.end < span.start || span.end > source.size() ||
      source.substr(span.start, span.end - span.start) != mutant.original_text)
    throw ArgumentError("mutant " + mutant.id + " does not match the source");
  std::string out(source.substr(0, span.start));
  out += mutant.mutated_text;
  out += source.substr(span.end);
  return out;
}

double MutationSummary::mutator_coverage() const {
  return total == 0 ? 0.0 : static_cast<double>(covered()) / static_cast<double>(total);
}

MutationSummary summarize(const std::vector<Mutant>& mutants) {
  MutationSummary s;
  s.total = mutants.size();
  for (const auto& m : mutants) {
    if (!m.status) continue;
    switch (*m.status) {
      case MutantStatus::killed: ++s.killed; break;
      case MutantStatus::survived: ++s.survived; break;
      case MutantStatus::not_covered: ++s.not_covered; break;
      case MutantStatus::compile_skipped: ++s.compile_skipped; break;
    }
  }
  return s;
}

MutationRun mutation_run(const fs::path& package_dir, std::vector<Mutant> mutants,
                         const CoverageReport& baseline_coverage, const MutationOptions& options,
                         const GoToolchain& go) {
  TestRunOptions run_options;
  run_options.run_filter = options.run_filter;
  run_options.timeout = options.timeout;
  run_options.coverage = false;

  for (auto& m : mutants) {
    auto covered = baseline_coverage.line_covered(m.file, m.line);
    if (!covered || !*covered) {
      m.status = MutantStatus::not_covered;
      continue;
    }
    const fs::path path = package_dir / m.file;
    const std::string original = read_file(path);
    const std::string before = sha256_file(path);
    const std::string mutated = apply_mutant(original, m);

    auto restore = [&] {
      if (!write_file(path, original) || sha256_file(path) != before)
        throw RestoreError("could not restore " + path.string() + " after mutant " + m.id);
    };
    if (!write_file(path, mutated)) {
      restore();
      throw IoError("cannot write mutant " + m.id);
    }
    TestRunResult run;
    try {
      run = run_tests_with_coverage(package_dir, run_options, go);
    } catch (...) {
      restore();
      throw;
    }
    restore();

    if (run.package_error && run.package_error->starts_with("build failed")) m.status = MutantStatus::compile_skipped;
    else if (run.all_passed()) m.status = MutantStatus::survived;
    else m.status = MutantStatus::killed;
  }
  MutationRun result;
  result.summary = summarize(mutants);
  result.mutants = std::move(mutants);
  return result;
}

MutationSummary GremlinsAdapter::parse(std::string_view output) const {
  auto grab = [&](const char* label) -> std::optional<std::size_t> {
    std::regex re(std::string(label) + R"(:\s*(\d+))", std::regex::icase);
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_search(output.begin(), output.end(), m, re)) return std::nullopt;
    return std::stoul(m[1].str());
  };
  auto killed = grab("Killed");
  auto lived = grab("Lived");
  auto not_covered = grab("Not covered");
  if (!killed || !lived || !not_covered) throw Error("unrecognised mutation tool summary");
  MutationSummary s;
  s.killed = *killed + grab("Timed out").value_or(0);
  s.survived = *lived;
  s.not_covered = *not_covered;
  s.compile_skipped = grab("Not viable").value_or(0);
  s.total = s.killed + s.survived + s.not_covered + s.compile_skipped;
  return s;
}

MutationSummary run_external_mutation(const std::string& executable, const std::vector<std::string>& args,
                                      const fs::path& package_dir, const MutationSummaryAdapter& adapter,
                                      std::chrono::milliseconds timeout) {
  auto exe = find_executable(executable);
  if (!exe) throw EnvironmentError("mutation tool not found: " + executable);
  auto full = args;
  full.push_back(fs::absolute(package_dir).string());
  auto result = run_command(exe->string(), full, package_dir, timeout);
  if (result.timed_out) throw Error("mutation tool timed out on " + package_dir.string());
  if (result.exit_code != 0)
    throw Error("mutation tool exited with status " + std::to_string(result.exit_code));
  return adapter.parse(result.output);
}

json to_json(const Mutant& m) {
  json j = {{"id", m.id},
            {"file", m.file},
            {"byte_span", {m.byte_span.start, m.byte_span.end}},
            {"line", m.line},
            {"original_text", m.original_text},
            {"mutated_text", m.mutated_text},
            {"operator", to_string(m.op)}};
  j["status"] = m.status ? json(to_string(*m.status)) : json(nullptr);
  return j;
}

Mutant mutant_from_json(const json& j) {
  Mutant m;
  m.id = j.at("id").get<std::string>();
  m.file = j.at("file").get<std::string>();
  m.byte_span = {j.at("byte_span").at(0).get<std::size_t>(), j.at("byte_span").at(1).get<std::size_t>()};
  m.line = j.at("line").get<int>();
  m.original_text = j.at("original_text").get<std::string>();
  m.mutated_text = j.at("mutated_text").get<std::string>();
  m.op = operator_from_string(j.at("operator").get<std::string>());
  if (j.contains("status") && !j["status"].is_null())
    m.status = mutant_status_from_string(j["status"].get<std::string>());
  return m;
}

json to_json(const MutationSummary& s) {
  return {{"total", s.total},
          {"killed", s.killed},
          {"survived", s.survived},
          {"not_covered", s.not_covered},
          {"compile_skipped", s.compile_skipped},
          {"covered", s.covered()},
          {"mutator_coverage", s.mutator_coverage()}};
}

}  // namespace ratg
