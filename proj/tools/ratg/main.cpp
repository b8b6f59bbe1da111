#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "ratg/config.hpp"
#include "ratg/pipeline.hpp"

namespace {

using namespace ratg;
namespace fs = std::filesystem;

constexpr int kExitFatal = 1;
constexpr int kExitUsage = 2;

struct Flags {
  std::optional<std::string> config_file;
  std::optional<std::string> project_dir, run_dir, project_name;
  std::optional<std::string> gopls, backend, script_dir, llm_endpoint, llm_token;
  std::optional<double> temperature;
  std::optional<int> max_tokens, candidates;
  std::optional<std::size_t> context_budget;
  std::optional<std::string> context_budget_unit, name_pattern;
  bool no_fetch = false, include_external = false, exported_only = false;
  std::optional<std::string> go, import_fixer, mutation_tool, log_level;
  std::vector<std::string> mutation_tool_args;
  std::optional<int> lsp_startup_timeout, lsp_request_timeout, generator_timeout, compile_timeout, test_timeout,
      mutant_timeout;
  std::vector<std::string> include_runs;
};

void add_flags(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config_file, "JSON config file (see README for the schema)");
  app.add_option("--project", f.project_dir, "Go module root to generate tests for");
  app.add_option("--run-dir", f.run_dir, "Directory holding every artifact of this run");
  app.add_option("--project-name", f.project_name, "Name used in reports (default: project directory name)");
  app.add_option("--gopls", f.gopls, "Language server executable (env RATG_GOPLS)");
  app.add_flag("--no-fetch", f.no_fetch, "Generate without retrieving definitions");
  app.add_flag("--include-external", f.include_external, "Also retrieve definitions outside the project");
  app.add_option("--backend", f.backend, "Generator backend")->check(CLI::IsMember({"scripted", "remote"}));
  app.add_option("--script-dir", f.script_dir, "Token scripts <unit_id>_<k>.tokens for the scripted backend");
  app.add_option("--llm-endpoint", f.llm_endpoint, "Completion endpoint URL (env RATG_LLM_ENDPOINT)");
  app.add_option("--llm-token", f.llm_token, "Bearer token for the endpoint (env RATG_LLM_TOKEN)");
  app.add_option("--temperature", f.temperature, "Sampling temperature for the remote backend");
  app.add_option("--max-tokens", f.max_tokens, "Token cap per candidate (default 512)");
  app.add_option("--candidates", f.candidates, "Candidates per focal unit (default 1)");
  app.add_option("--context-budget", f.context_budget, "Context budget size (default 6000)");
  app.add_option("--context-budget-unit", f.context_budget_unit, "characters or tokens");
  app.add_option("--name-pattern", f.name_pattern, "Regex over focal ids such as stack.Stack.Push");
  app.add_flag("--exported-only", f.exported_only, "Only exported functions and methods");
  app.add_option("--go", f.go, "Go toolchain executable");
  app.add_option("--import-fixer", f.import_fixer, "Executable run on each assembled test file");
  app.add_option("--mutation-tool", f.mutation_tool, "External mutation tool run per package");
  app.add_option("--mutation-tool-arg", f.mutation_tool_args, "Argument passed to the mutation tool (repeatable)");
  app.add_option("--lsp-startup-timeout", f.lsp_startup_timeout, "Seconds (default 60)");
  app.add_option("--lsp-request-timeout", f.lsp_request_timeout, "Seconds (default 10)");
  app.add_option("--generator-timeout", f.generator_timeout, "Seconds per generator request (default 60)");
  app.add_option("--compile-timeout", f.compile_timeout, "Seconds per compile check (default 300)");
  app.add_option("--test-timeout", f.test_timeout, "Seconds per package test run (default 120)");
  app.add_option("--mutant-timeout", f.mutant_timeout, "Seconds per mutant test run (default 30)");
  app.add_option("--log-level", f.log_level, "trace, debug, info, warn, error, critical or off");
}

std::chrono::seconds positive_seconds(int n, const char* field) {
  if (n <= 0) throw ConfigError(field, "must be a positive number of seconds");
  return std::chrono::seconds(n);
}

RunConfig resolve(const Flags& f) {
  RunConfig c;
  if (f.config_file) apply_config_file(c, *f.config_file);
  apply_environment(c, process_environment());
  if (f.project_dir) c.project_dir = *f.project_dir;
  if (f.run_dir) c.run_dir = *f.run_dir;
  if (f.project_name) c.project_name = *f.project_name;
  if (f.gopls) c.gopls_path = *f.gopls;
  if (f.no_fetch) c.fetch_enabled = false;
  if (f.include_external) c.include_external = true;
  if (f.backend) c.backend = *f.backend == "remote" ? Backend::remote : Backend::scripted;
  if (f.script_dir) c.script_dir = *f.script_dir;
  if (f.llm_endpoint) c.llm_endpoint = *f.llm_endpoint;
  if (f.llm_token) c.llm_token = *f.llm_token;
  if (f.temperature) c.temperature = *f.temperature;
  if (f.max_tokens) c.max_tokens = *f.max_tokens;
  if (f.candidates) c.candidates = *f.candidates;
  if (f.context_budget) c.context_budget.limit = *f.context_budget;
  if (f.context_budget_unit) c.context_budget.unit = budget_unit_from_string(*f.context_budget_unit);
  if (f.name_pattern) c.filter.name_pattern = *f.name_pattern;
  if (f.exported_only) c.filter.exported_only = true;
  if (f.go) c.go = *f.go;
  if (f.import_fixer) c.import_fixer = *f.import_fixer;
  if (f.mutation_tool) c.mutation_tool = *f.mutation_tool;
  if (!f.mutation_tool_args.empty()) c.mutation_tool_args = f.mutation_tool_args;
  if (f.lsp_startup_timeout) c.timeouts.lsp_startup = positive_seconds(*f.lsp_startup_timeout, "timeouts.lsp_startup");
  if (f.lsp_request_timeout) c.timeouts.lsp_request = positive_seconds(*f.lsp_request_timeout, "timeouts.lsp_request");
  if (f.generator_timeout) c.timeouts.generator = positive_seconds(*f.generator_timeout, "timeouts.generator");
  if (f.compile_timeout) c.timeouts.compile = positive_seconds(*f.compile_timeout, "timeouts.compile");
  if (f.test_timeout) c.timeouts.test = positive_seconds(*f.test_timeout, "timeouts.test");
  if (f.mutant_timeout) c.timeouts.mutant = positive_seconds(*f.mutant_timeout, "timeouts.mutant");
  if (f.log_level) c.log_level = *f.log_level;
  return c;
}

void print_summary(const EvalReport& r) {
  std::cout << r.project << ": " << r.compiled << "/" << r.candidates << " compiled, " << r.passed
            << " passed, line coverage " << r.line_coverage << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Repository-aware Go unit test generation and evaluation.\n"
      "Settings resolve as: flags > environment (RATG_GOPLS, RATG_LLM_ENDPOINT, RATG_LLM_TOKEN) > --config file > "
      "defaults."};
  app.require_subcommand(1);
  app.fallthrough();
  Flags flags;
  add_flags(app, flags);
  auto* extract = app.add_subcommand("extract", "List focal functions and methods into manifest.json");
  auto* generate = app.add_subcommand("generate", "Generate candidates for every focal unit");
  auto* evaluate = app.add_subcommand("evaluate", "Compile and run candidates, measure line coverage");
  auto* mutate = app.add_subcommand("mutate", "Mutation testing with the passing candidates");
  auto* run = app.add_subcommand("run", "extract, generate, evaluate, mutate and report");
  auto* report = app.add_subcommand("report", "Aggregate report over this and other run directories");
  report->add_option("--include", flags.include_runs, "Another run directory to aggregate (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  auto logger = spdlog::stderr_color_mt("ratg");
  spdlog::set_default_logger(logger);

  RunConfig config;
  const bool needs_generation = generate->parsed() || run->parsed();
  try {
    config = resolve(flags);
    validate(config, needs_generation);
  } catch (const ConfigError& e) {
    std::cerr << "ratg: invalid configuration: " << e.what() << "\n";
    return kExitUsage;
  }
  spdlog::set_level(spdlog::level::from_str(config.log_level));

  try {
    RunDirectory dir(config.run_dir);
    if (extract->parsed()) {
      auto units = cmd_extract(config, dir);
      std::cout << units.size() << " focal units written to " << dir.manifest().string() << "\n";
    } else if (generate->parsed()) {
      auto s = cmd_generate(config, dir, default_generator_factory(config));
      std::cout << s.generated << " generated, " << s.skipped << " already present, " << s.failed << " failed\n";
    } else if (evaluate->parsed()) {
      print_summary(cmd_evaluate(config, dir));
    } else if (mutate->parsed()) {
      auto s = cmd_mutate(config, dir);
      std::cout << s.killed << " killed, " << s.covered() << " covered of " << s.total << " mutants\n";
    } else if (run->parsed()) {
      std::cout << cmd_run(config, dir, default_generator_factory(config)).table;
    } else if (report->parsed()) {
      std::vector<fs::path> others(flags.include_runs.begin(), flags.include_runs.end());
      std::cout << cmd_report(config, dir, others).table;
    }
  } catch (const ConfigError& e) {
    std::cerr << "ratg: invalid configuration: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "ratg: " << e.what() << "\n";
    return kExitFatal;
  }
  return 0;
}
