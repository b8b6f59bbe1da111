#include "ratg/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <regex>

#include "ratg/process.hpp"

namespace ratg {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view to_string(Backend b) { return b == Backend::scripted ? "scripted" : "remote"; }

namespace {

template <typename T>
T get(const json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(key, "unexpected value " + value.dump());
  }
}

std::chrono::seconds seconds(const json& value, const std::string& key) {
  const auto n = get<long long>(value, key);
  if (n <= 0) throw ConfigError(key, "must be a positive number of seconds");
  return std::chrono::seconds(n);
}

Backend backend_from_string(const std::string& s) {
  if (s == "scripted") return Backend::scripted;
  if (s == "remote") return Backend::remote;
  throw ConfigError("backend", "expected 'scripted' or 'remote', got '" + s + "'");
}

}  // namespace

void apply_config_document(RunConfig& c, const json& doc) {
  if (!doc.is_object()) throw ConfigError("config", "expected a JSON object");
  for (const auto& [key, v] : doc.items()) {
    if (key == "project_dir") c.project_dir = get<std::string>(v, key);
    else if (key == "run_dir") c.run_dir = get<std::string>(v, key);
    else if (key == "project_name") c.project_name = get<std::string>(v, key);
    else if (key == "gopls_path") c.gopls_path = get<std::string>(v, key);
    else if (key == "gopls_args") c.gopls_args = get<std::vector<std::string>>(v, key);
    else if (key == "fetch_enabled") c.fetch_enabled = get<bool>(v, key);
    else if (key == "include_external") c.include_external = get<bool>(v, key);
    else if (key == "backend") c.backend = backend_from_string(get<std::string>(v, key));
    else if (key == "script_dir") c.script_dir = get<std::string>(v, key);
    else if (key == "llm_endpoint") c.llm_endpoint = get<std::string>(v, key);
    else if (key == "llm_token") c.llm_token = get<std::string>(v, key);
    else if (key == "temperature") c.temperature = get<double>(v, key);
    else if (key == "max_tokens") c.max_tokens = get<int>(v, key);
    else if (key == "candidates") c.candidates = get<int>(v, key);
    else if (key == "context_budget") c.context_budget.limit = get<std::size_t>(v, key);
    else if (key == "context_budget_unit") c.context_budget.unit = budget_unit_from_string(get<std::string>(v, key));
    else if (key == "name_pattern") c.filter.name_pattern = get<std::string>(v, key);
    else if (key == "exported_only") c.filter.exported_only = get<bool>(v, key);
    else if (key == "go") c.go = get<std::string>(v, key);
    else if (key == "import_fixer") c.import_fixer = get<std::string>(v, key);
    else if (key == "mutation_tool") c.mutation_tool = get<std::string>(v, key);
    else if (key == "mutation_tool_args") c.mutation_tool_args = get<std::vector<std::string>>(v, key);
    else if (key == "log_level") c.log_level = get<std::string>(v, key);
    else if (key == "timeouts") {
      if (!v.is_object()) throw ConfigError(key, "expected an object");
      for (const auto& [name, t] : v.items()) {
        const std::string field = "timeouts." + name;
        if (name == "lsp_startup") c.timeouts.lsp_startup = seconds(t, field);
        else if (name == "lsp_request") c.timeouts.lsp_request = seconds(t, field);
        else if (name == "generator") c.timeouts.generator = seconds(t, field);
        else if (name == "compile") c.timeouts.compile = seconds(t, field);
        else if (name == "test") c.timeouts.test = seconds(t, field);
        else if (name == "mutant") c.timeouts.mutant = seconds(t, field);
        else throw ConfigError(field, "unknown key");
      }
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
}

void apply_config_file(RunConfig& config, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  json doc = json::parse(in, nullptr, false, true);
  if (doc.is_discarded()) throw ConfigError("config", path.string() + " is not valid JSON");
  apply_config_document(config, doc);
}

void apply_environment(RunConfig& c, const EnvLookup& lookup) {
  if (auto v = lookup("RATG_GOPLS"); v && !v->empty()) c.gopls_path = *v;
  if (auto v = lookup("RATG_LLM_ENDPOINT"); v && !v->empty()) c.llm_endpoint = *v;
  if (auto v = lookup("RATG_LLM_TOKEN"); v && !v->empty()) c.llm_token = *v;
}

EnvLookup process_environment() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
}

void validate(RunConfig& c, bool needs_generation) {
  if (c.project_dir.empty()) throw ConfigError("project_dir", "required");
  if (!fs::is_directory(c.project_dir)) throw ConfigError("project_dir", "not a directory: " + c.project_dir.string());
  if (!fs::exists(c.project_dir / "go.mod")) throw ConfigError("project_dir", "no go.mod in " + c.project_dir.string());
  c.project_dir = fs::canonical(c.project_dir);
  if (c.run_dir.empty()) throw ConfigError("run_dir", "required");
  c.run_dir = fs::weakly_canonical(fs::absolute(c.run_dir));
  if (c.run_dir == c.project_dir) throw ConfigError("run_dir", "must differ from project_dir");
  if (c.project_name.empty()) c.project_name = c.project_dir.filename().string();
  if (c.max_tokens < 1) throw ConfigError("max_tokens", "must be at least 1");
  if (c.candidates < 1) throw ConfigError("candidates", "must be at least 1");
  if (c.context_budget.limit < 1) throw ConfigError("context_budget", "must be at least 1");
  if (c.temperature < 0.0) throw ConfigError("temperature", "must not be negative");
  if (!c.filter.name_pattern.empty()) {
    try {
      std::regex probe(c.filter.name_pattern);
    } catch (const std::regex_error& e) {
      throw ConfigError("name_pattern", e.what());
    }
  }
  static const std::vector<std::string> levels = {"trace", "debug", "info", "warn", "error", "critical", "off"};
  if (std::find(levels.begin(), levels.end(), c.log_level) == levels.end())
    throw ConfigError("log_level", "unknown level " + c.log_level);
  if (!c.import_fixer.empty()) {
    auto exe = find_executable(c.import_fixer);
    if (!exe) throw ConfigError("import_fixer", "not an executable: " + c.import_fixer);
    c.import_fixer = exe->string();
  }
  if (!c.mutation_tool.empty()) {
    auto exe = find_executable(c.mutation_tool);
    if (!exe) throw ConfigError("mutation_tool", "not an executable: " + c.mutation_tool);
    c.mutation_tool = exe->string();
  }
  if (!needs_generation) return;

  if (c.fetch_enabled) {
    auto server = find_executable(c.gopls_path);
    if (!server) throw ConfigError("gopls_path", "not an executable: " + c.gopls_path);
    c.gopls_path = server->string();
  }
  if (c.backend == Backend::scripted) {
    if (c.script_dir.empty()) throw ConfigError("script_dir", "required by the scripted backend");
    if (!fs::is_directory(c.script_dir)) throw ConfigError("script_dir", "not a directory: " + c.script_dir.string());
    c.script_dir = fs::canonical(c.script_dir);
  } else if (c.llm_endpoint.empty()) {
    throw ConfigError("llm_endpoint", "required by the remote backend");
  }
}

json to_json(const RunConfig& c) {
  return {{"project_dir", c.project_dir.string()},
          {"run_dir", c.run_dir.string()},
          {"project_name", c.project_name},
          {"gopls_path", c.gopls_path},
          {"gopls_args", c.gopls_args},
          {"fetch_enabled", c.fetch_enabled},
          {"include_external", c.include_external},
          {"backend", to_string(c.backend)},
          {"script_dir", c.script_dir.string()},
          {"llm_endpoint", c.llm_endpoint},
          {"temperature", c.temperature},
          {"max_tokens", c.max_tokens},
          {"candidates", c.candidates},
          {"context_budget", c.context_budget.limit},
          {"context_budget_unit", to_string(c.context_budget.unit)},
          {"name_pattern", c.filter.name_pattern},
          {"exported_only", c.filter.exported_only},
          {"go", c.go},
          {"import_fixer", c.import_fixer},
          {"mutation_tool", c.mutation_tool},
          {"mutation_tool_args", c.mutation_tool_args},
          {"log_level", c.log_level},
          {"timeouts",
           {{"lsp_startup", c.timeouts.lsp_startup.count()},
            {"lsp_request", c.timeouts.lsp_request.count()},
            {"generator", c.timeouts.generator.count()},
            {"compile", c.timeouts.compile.count()},
            {"test", c.timeouts.test.count()},
            {"mutant", c.timeouts.mutant.count()}}}};
}

}  // namespace ratg
