#include "ratg/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ratg/eval.hpp"
#include "ratg/fetcher.hpp"
#include "ratg/generation.hpp"

namespace ratg {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw IoError("cannot write " + p.string());
}

json read_json(const fs::path& p) {
  json j = json::parse(read_text(p), nullptr, false);
  if (j.is_discarded()) throw IoError(p.string() + " is not valid JSON");
  return j;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

std::string iso_time() {
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string sanitize(std::string_view s) {
  std::string out;
  for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out;
}

std::string placed_file_name(const std::string& stem) { return "ratg_" + sanitize(stem) + "_test.go"; }

GoToolchain toolchain(const RunConfig& config) {
  GoToolchain go;
  go.go = config.go;
  return go;
}

void refresh_copy(const RunConfig& config, const fs::path& dest) {
  fs::remove_all(dest);
  copy_project(config.project_dir, dest, config.run_dir);
}

/// Units of the generation workspace selected by the filter and the manifest.
std::vector<FocalUnit> selected_units(const RunConfig& config, RunDirectory& run, GoModule& module) {
  module = load_module(run.workspace());
  auto scan = scan_module(module);
  auto units = filter_units(scan.units, config.filter);
  std::set<std::string> listed;
  const auto manifest = read_json(run.manifest());
  for (const auto& u : manifest.at("units")) listed.insert(u.at("id").get<std::string>());
  std::erase_if(units, [&](const FocalUnit& u) { return !listed.contains(u.id()); });
  return units;
}

struct CandidateFiles {
  std::string stem;
  json candidate;
  std::string test_file;
};

std::vector<CandidateFiles> load_candidates(RunDirectory& run) {
  std::vector<CandidateFiles> out;
  if (!fs::is_directory(run.candidates())) return out;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(run.candidates()))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    CandidateFiles c;
    c.stem = f.stem().string();
    c.candidate = read_json(f);
    c.test_file = read_text(run.candidates() / (c.stem + "_test.go"));
    out.push_back(std::move(c));
  }
  return out;
}

CoverageReport merge(const std::vector<CoverageReport>& parts) {
  CoverageReport out;
  for (const auto& p : parts)
    for (const auto& [file, lines] : p.files)
      for (const auto& [line, covered] : lines) {
        bool& slot = out.files[file][line];
        slot = slot || covered;
      }
  const auto total = out.total_lines();
  out.line_coverage = total == 0 ? 0.0 : static_cast<double>(out.covered_lines()) / static_cast<double>(total);
  return out;
}

}  // namespace

RunDirectory::RunDirectory(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

void RunDirectory::record(const std::string& command, const std::string& level, const std::string& event,
                          const std::string& detail) {
  if (level == "error") ++errors_;
  json line = {{"time", iso_time()}, {"command", command}, {"level", level}, {"event", event}};
  if (!detail.empty()) line["detail"] = detail;
  std::ofstream out(root_ / "ledger.jsonl", std::ios::app);
  out << line.dump() << "\n";
  if (level == "error") spdlog::error("{}: {} {}", command, event, detail);
  else if (level == "warn") spdlog::warn("{}: {} {}", command, event, detail);
  else spdlog::info("{}: {} {}", command, event, detail);
}

void copy_project(const fs::path& from, const fs::path& to, const fs::path& skip) {
  const fs::path skip_abs = skip.empty() ? fs::path() : fs::weakly_canonical(skip);
  fs::create_directories(to);
  for (auto it = fs::recursive_directory_iterator(from); it != fs::recursive_directory_iterator(); ++it) {
    const auto& p = it->path();
    const auto name = p.filename().string();
    if (it->is_directory()) {
      if (name == ".git" || name == ".hg" || name == ".svn" || (!skip_abs.empty() && fs::weakly_canonical(p) == skip_abs)) {
        it.disable_recursion_pending();
        continue;
      }
      fs::create_directories(to / fs::relative(p, from));
    } else if (it->is_regular_file() && !name.ends_with("_test.go")) {
      fs::copy_file(p, to / fs::relative(p, from), fs::copy_options::overwrite_existing);
    }
  }
}

json to_json(const FocalUnit& u) {
  json seeds = seed_identifiers(u);
  json j = {{"id", u.id()},
            {"name", u.name()},
            {"kind", to_string(u.kind())},
            {"file", u.file_path},
            {"package_path", u.package_path},
            {"package_name", u.package_name},
            {"byte_span", {u.byte_span.start, u.byte_span.end}},
            {"header", signature_header(u.source_text)},
            {"seeds", seeds}};
  if (u.signature.receiver_type) j["receiver"] = u.signature.receiver_type->name;
  j["doc_comment"] = u.doc_comment ? json(*u.doc_comment) : json(nullptr);
  return j;
}

std::string candidate_stem(const std::string& unit_id, int k) { return unit_id + "_" + std::to_string(k); }

GeneratorFactory default_generator_factory(const RunConfig& config) {
  if (config.backend == Backend::scripted) {
    const fs::path dir = config.script_dir;
    return [dir](const FocalUnit& unit, int k) -> std::unique_ptr<TokenGenerator> {
      return std::make_unique<ScriptedGenerator>(
          ScriptedGenerator::from_file(dir / (candidate_stem(unit.id(), k) + ".tokens")));
    };
  }
  RemoteGeneratorOptions opts;
  opts.endpoint = config.llm_endpoint;
  opts.token = config.llm_token;
  opts.temperature = config.temperature;
  opts.timeout = config.timeouts.generator;
  return [opts](const FocalUnit&, int) -> std::unique_ptr<TokenGenerator> {
    return std::make_unique<RemoteGenerator>(opts);
  };
}

std::vector<FocalUnit> cmd_extract(const RunConfig& config, RunDirectory& run) {
  write_json(run.root() / "config.json", to_json(config));
  refresh_copy(config, run.workspace());
  auto module = load_module(run.workspace());
  auto scan = scan_module(module);
  for (const auto& e : scan.errors) run.record("extract", "warn", "scan error", e.file_path + ": " + e.message);
  auto units = filter_units(scan.units, config.filter);
  json list = json::array();
  for (const auto& u : units) list.push_back(to_json(u));
  write_json(run.manifest(), {{"project", config.project_name}, {"module", module.module_path}, {"units", list}});
  run.record("extract", "info", "extracted", std::to_string(units.size()) + " focal units");
  return units;
}

GenerateSummary cmd_generate(const RunConfig& config, RunDirectory& run, const GeneratorFactory& factory) {
  if (!fs::exists(run.manifest()) || !fs::is_directory(run.workspace())) cmd_extract(config, run);
  GoModule module;
  const auto units = selected_units(config, run, module);

  std::optional<ServerHandle> server;
  std::optional<LanguageServerFetcher> fetcher;
  if (config.fetch_enabled) {
    ServerOptions opts;
    opts.executable = config.gopls_path;
    opts.args = config.gopls_args;
    opts.startup_timeout = config.timeouts.lsp_startup;
    opts.request_timeout = config.timeouts.lsp_request;
    opts.extra_env = toolchain(config).env;
    server.emplace(ServerHandle::start(run.workspace(), opts));
    FetchOptions fetch_opts;
    fetch_opts.include_external = config.include_external;
    fetcher.emplace(*server, fetch_opts);
  }

  GenerateSummary summary;
  fs::create_directories(run.candidates());
  for (const auto& unit : units) {
    for (int k = 1; k <= config.candidates; ++k) {
      const std::string stem = candidate_stem(unit.id(), k);
      const fs::path json_path = run.candidates() / (stem + ".json");
      if (fs::exists(json_path) && fs::exists(run.candidates() / (stem + "_test.go"))) {
        ++summary.skipped;
        continue;
      }
      TestCandidate candidate;
      try {
        auto generator = factory(unit, k);
        auto store = ContextStore::with_go_builtins(config.context_budget);
        GenerationConfig gen;
        gen.max_tokens = config.max_tokens;
        gen.fetch_enabled = config.fetch_enabled;
        candidate = generate(unit, *generator, fetcher ? &*fetcher : nullptr, store, module, gen);
      } catch (const GeneratorError& e) {
        run.record("generate", "error", "generation failed", stem + ": " + e.what());
        ++summary.failed;
        continue;
      } catch (const IoError& e) {
        run.record("generate", "error", "generator unavailable", stem + ": " + e.what());
        ++summary.failed;
        continue;
      } catch (const ArgumentError& e) {
        run.record("generate", "error", "generator unavailable", stem + ": " + e.what());
        ++summary.failed;
        continue;
      }

      std::string file;
      AssembleOptions assemble;
      assemble.working_dir = run.workspace() / unit.package_path;
      if (!config.import_fixer.empty()) assemble.import_fixer = config.import_fixer;
      try {
        file = assemble_test_file(candidate, unit.package_name, assemble);
      } catch (const Error& e) {
        run.record("generate", "warn", "import fixer failed", stem + ": " + e.what());
        file = test_file_text(unit.package_name, candidate.imports, candidate.source_text);
      }
      auto doc = to_json(candidate);
      doc["final_prompt"] = candidate.final_prompt;
      write_text(run.candidates() / (stem + "_test.go"), file);
      write_json(json_path, doc);
      ++summary.generated;
      run.record("generate", "info", "candidate", stem + " " + std::string(to_string(candidate.stop_reason)) + " after " +
                                                     std::to_string(candidate.token_count) + " tokens");
    }
  }
  if (server) server->shutdown();
  return summary;
}

EvalReport cmd_evaluate(const RunConfig& config, RunDirectory& run) {
  const auto go = toolchain(config);
  auto candidates = load_candidates(run);
  if (candidates.empty()) run.record("evaluate", "warn", "no candidates to evaluate");

  const fs::path work = run.evaluation() / "workspace";
  refresh_copy(config, work);
  const fs::path placed_dir = run.evaluation() / "placed";
  fs::remove_all(placed_dir);
  fs::create_directories(placed_dir);

  struct Entry {
    const CandidateFiles* files;
    std::string package_path;
    CompileResult compile;
    std::string test_name;
    std::string placed;
    std::optional<TestStatus> status;
  };
  std::vector<Entry> entries;
  std::vector<CompileResult> compile_results;
  for (const auto& c : candidates) {
    Entry e{&c, c.candidate.at("package_path").get<std::string>(), {}, {}, placed_file_name(c.stem), std::nullopt};
    e.compile = compile_check(c.test_file, work / e.package_path, e.placed, go, config.timeouts.compile);
    e.compile.candidate = c.stem;
    run.record("evaluate", "info", "compile", c.stem + " " + std::string(to_string(e.compile.status)));
    compile_results.push_back(e.compile);
    entries.push_back(std::move(e));
  }

  auto module = load_module(work);
  std::vector<CoverageReport> coverage_parts;
  json package_results = json::array();
  for (const auto& pkg : module.packages) {
    const fs::path dir = work / pkg.dir;
    std::set<std::string> names;
    std::vector<std::string> expected;
    std::vector<fs::path> placed_paths;
    for (auto& e : entries) {
      if (e.package_path != pkg.dir || e.compile.status != CompileStatus::compiled) continue;
      std::string text = e.files->test_file;
      std::string name = test_function_name(text);
      if (name.empty()) {
        run.record("evaluate", "warn", "no test function", e.files->stem);
        continue;
      }
      if (names.contains(name)) {
        int n = 2;
        while (names.contains(name + "_" + std::to_string(n))) ++n;
        const std::string renamed = name + "_" + std::to_string(n);
        text = rename_test_function(text, name, renamed);
        name = renamed;
      }
      names.insert(name);
      e.test_name = name;
      expected.push_back(name);
      write_text(dir / e.placed, text);
      write_text(placed_dir / e.placed, text);
      placed_paths.push_back(dir / e.placed);
    }

    TestRunOptions opts;
    opts.timeout = config.timeouts.test;
    opts.expected_tests = expected;
    auto result = run_tests_with_coverage(dir, opts, go);
    if (result.package_error) run.record("evaluate", "error", "package failed", pkg.dir + ": " + *result.package_error);
    if (result.timed_out) run.record("evaluate", "warn", "package timed out", pkg.dir);
    for (auto& e : entries)
      if (e.package_path == pkg.dir && !e.test_name.empty()) e.status = result.tests.at(e.test_name);

    CoverageReport coverage = result.coverage;
    if (coverage.files.empty()) {
      // No profile came back; measure the package with no generated tests so
      // its lines still count as uncovered.
      for (const auto& p : placed_paths) fs::remove(p);
      TestRunOptions bare;
      bare.timeout = config.timeouts.test;
      coverage = run_tests_with_coverage(dir, bare, go).coverage;
    }
    coverage_parts.push_back(coverage);
    json tests = json::object();
    for (const auto& [name, status] : result.tests) tests[name] = to_string(status);
    json pr = {{"package", pkg.dir}, {"tests", tests}, {"line_coverage", coverage.line_coverage},
               {"timed_out", result.timed_out}};
    pr["package_error"] = result.package_error ? json(*result.package_error) : json(nullptr);
    package_results.push_back(pr);
  }

  const auto coverage = merge(coverage_parts);
  std::size_t passed = 0;
  json results = json::array();
  for (const auto& e : entries) {
    if (e.status == TestStatus::passed) ++passed;
    json r = {{"candidate", e.files->stem},
              {"focal_id", e.files->candidate.at("focal_id")},
              {"package_path", e.package_path},
              {"compile", to_json(e.compile)},
              {"placed_file", e.placed},
              {"test_name", e.test_name}};
    r["test_status"] = e.status ? json(to_string(*e.status)) : json(nullptr);
    results.push_back(r);
  }
  auto report = make_eval_report(config.project_name, compile_results, passed, coverage.line_coverage, {});
  write_json(run.evaluation() / "results.json", results);
  write_json(run.evaluation() / "packages.json", package_results);
  write_json(run.evaluation() / "coverage.json", to_json(coverage));
  write_json(run.evaluation() / "report.json", to_json(report));
  run.record("evaluate", "info", "evaluated",
             std::to_string(entries.size()) + " candidates, " + std::to_string(passed) + " passed");
  return report;
}

MutationSummary cmd_mutate(const RunConfig& config, RunDirectory& run) {
  const auto results_path = run.evaluation() / "results.json";
  if (!fs::exists(results_path)) throw Error("no evaluation results in " + run.root().string() + "; run evaluate first");
  const auto go = toolchain(config);
  const auto results = read_json(results_path);

  const fs::path work = run.mutation() / "workspace";
  refresh_copy(config, work);
  auto module = load_module(work);

  MutationSummary total;
  json packages = json::array();
  for (const auto& pkg : module.packages) {
    const fs::path dir = work / pkg.dir;
    int placed = 0;
    for (const auto& r : results) {
      if (r.at("package_path") != pkg.dir || r.at("test_status") != "passed") continue;
      const auto name = r.at("placed_file").get<std::string>();
      write_text(dir / name, read_text(run.evaluation() / "placed" / name));
      ++placed;
    }

    MutationSummary summary;
    json mutants_doc = json::array();
    if (!config.mutation_tool.empty()) {
      summary = run_external_mutation(config.mutation_tool, config.mutation_tool_args, dir, GremlinsAdapter());
    } else {
      CoverageReport baseline;
      if (placed > 0) {
        TestRunOptions opts;
        opts.timeout = config.timeouts.test;
        auto base = run_tests_with_coverage(dir, opts, go);
        if (base.all_passed()) baseline = base.coverage;
        else run.record("mutate", "warn", "baseline tests failed; mutants left uncovered", pkg.dir);
      }
      const auto before = directory_checksums(dir);
      MutationOptions opts;
      opts.timeout = config.timeouts.mutant;
      auto result = mutation_run(dir, micro_mutate(dir), baseline, opts, go);
      if (directory_checksums(dir) != before) throw RestoreError("working copy of " + pkg.dir + " changed during mutation");
      summary = result.summary;
      for (const auto& m : result.mutants) mutants_doc.push_back(to_json(m));
    }
    write_json(run.mutation() / ("package_" + sanitize(pkg.dir) + ".json"),
               {{"package", pkg.dir}, {"summary", to_json(summary)}, {"mutants", mutants_doc}});
    packages.push_back({{"package", pkg.dir}, {"summary", to_json(summary)}});
    total.total += summary.total;
    total.killed += summary.killed;
    total.survived += summary.survived;
    total.not_covered += summary.not_covered;
    total.compile_skipped += summary.compile_skipped;
    run.record("mutate", "info", "package", pkg.dir + " killed " + std::to_string(summary.killed) + " of " +
                                                std::to_string(summary.total));
  }
  write_json(run.mutation() / "summary.json", {{"total", to_json(total)}, {"packages", packages}});
  return total;
}

namespace {

EvalReport load_report(const fs::path& run_root) {
  const auto eval = run_root / "evaluation" / "report.json";
  if (!fs::exists(eval)) throw Error("no evaluation report in " + run_root.string() + "; run evaluate first");
  auto report = eval_report_from_json(read_json(eval));
  const auto mutation = run_root / "mutation" / "summary.json";
  if (fs::exists(mutation)) {
    const auto t = read_json(mutation).at("total");
    report.mutants_total = t.at("total").get<double>();
    report.mutants_covered = t.at("covered").get<double>();
    report.mutants_killed = t.at("killed").get<double>();
    report.mutator_coverage = t.at("mutator_coverage").get<double>();
  }
  return report;
}

}  // namespace

AggregateReport cmd_report(const RunConfig&, RunDirectory& run, const std::vector<fs::path>& other_runs) {
  std::vector<EvalReport> reports{load_report(run.root())};
  for (const auto& other : other_runs) reports.push_back(load_report(other));
  auto aggregate = aggregate_report(reports);
  write_json(run.root() / "report.json", aggregate.document);
  write_text(run.root() / "report.txt", aggregate.table);
  run.record("report", "info", "report written", (run.root() / "report.txt").string());
  return aggregate;
}

AggregateReport cmd_run(const RunConfig& config, RunDirectory& run, const GeneratorFactory& factory) {
  cmd_extract(config, run);
  cmd_generate(config, run, factory);
  cmd_evaluate(config, run);
  cmd_mutate(config, run);
  return cmd_report(config, run);
}

}  // namespace ratg
