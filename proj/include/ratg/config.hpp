#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ratg/context_store.hpp"
#include "ratg/focal.hpp"

namespace ratg {

enum class Backend { scripted, remote };
std::string_view to_string(Backend b);

struct Timeouts {
  std::chrono::seconds lsp_startup{60};
  std::chrono::seconds lsp_request{10};
  std::chrono::seconds generator{60};
  std::chrono::seconds compile{300};
  std::chrono::seconds test{120};
  std::chrono::seconds mutant{30};
};

struct RunConfig {
  std::filesystem::path project_dir;
  std::filesystem::path run_dir;
  std::string project_name;  // defaults to the project directory's name

  std::string gopls_path = "gopls";
  std::vector<std::string> gopls_args;
  bool fetch_enabled = true;
  bool include_external = false;

  Backend backend = Backend::scripted;
  std::filesystem::path script_dir;
  std::string llm_endpoint;
  std::string llm_token;
  double temperature = 0.0;

  int max_tokens = 512;
  int candidates = 1;
  ContextBudget context_budget;
  FocalFilter filter;
  Timeouts timeouts;

  std::string go = "go";
  std::string import_fixer;
  std::string mutation_tool;
  std::vector<std::string> mutation_tool_args;
  std::string log_level = "info";
};

/// Overlays the keys present in a config document. Unknown keys and
/// ill-typed values throw ConfigError naming the key.
void apply_config_document(RunConfig& config, const nlohmann::json& document);
/// Reads a JSON config file and applies it.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
/// RATG_GOPLS, RATG_LLM_ENDPOINT and RATG_LLM_TOKEN.
void apply_environment(RunConfig& config, const EnvLookup& lookup);
EnvLookup process_environment();

/// Checks ranges and resolves paths; throws ConfigError naming the field.
/// `needs_generation` adds the generator and language-server checks.
void validate(RunConfig& config, bool needs_generation);

/// The resolved configuration without the LLM token.
nlohmann::json to_json(const RunConfig& config);

}  // namespace ratg
