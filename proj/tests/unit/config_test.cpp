#include <gtest/gtest.h>

#include <fstream>
#include <map>

#include "ratg/config.hpp"
#include "support/test_support.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ratg;
using json = nlohmann::json;
using ratg::testing::TempDir;

std::string field_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars](const std::string& k) -> std::optional<std::string> {
    if (auto it = vars.find(k); it != vars.end()) return it->second;
    return std::nullopt;
  };
}

class ConfigValidation : public ::testing::Test {
 protected:
  void SetUp() override {
    fs::create_directories(dir_.path() / "mod");
    std::ofstream(dir_.path() / "mod" / "go.mod") << "module example.com/m\n\ngo 1.21\n";
    fs::create_directories(dir_.path() / "scripts");
    config_.project_dir = dir_.path() / "mod";
    config_.run_dir = dir_.path() / "run";
    config_.script_dir = dir_.path() / "scripts";
    config_.fetch_enabled = false;
  }
  TempDir dir_;
  RunConfig config_;
};

TEST(Config, DefaultsMatchDocumentedValues) {
  RunConfig c;
  EXPECT_EQ(c.max_tokens, 512);
  EXPECT_EQ(c.candidates, 1);
  EXPECT_EQ(c.gopls_path, "gopls");
  EXPECT_TRUE(c.fetch_enabled);
  EXPECT_EQ(c.backend, Backend::scripted);
  EXPECT_EQ(c.timeouts.lsp_startup.count(), 60);
  EXPECT_EQ(c.timeouts.lsp_request.count(), 10);
  EXPECT_EQ(c.timeouts.compile.count(), 300);
  EXPECT_EQ(c.timeouts.test.count(), 120);
  EXPECT_EQ(c.timeouts.mutant.count(), 30);
}

TEST(Config, DocumentOverlaysOnlyPresentKeys) {
  RunConfig c;
  apply_config_document(c, json::parse(R"({"max_tokens": 64, "backend": "remote", "name_pattern": "^calc\\.",
                                           "timeouts": {"test": 5}, "mutation_tool_args": ["--x"]})"));
  EXPECT_EQ(c.max_tokens, 64);
  EXPECT_EQ(c.backend, Backend::remote);
  EXPECT_EQ(c.filter.name_pattern, "^calc\\.");
  EXPECT_EQ(c.timeouts.test.count(), 5);
  EXPECT_EQ(c.timeouts.compile.count(), 300);
  EXPECT_EQ(c.mutation_tool_args, std::vector<std::string>{"--x"});
  EXPECT_EQ(c.candidates, 1);
}

TEST(Config, BadDocumentsNameTheKey) {
  RunConfig c;
  EXPECT_EQ(field_of([&] { apply_config_document(c, json{{"max_tokenz", 3}}); }), "max_tokenz");
  EXPECT_EQ(field_of([&] { apply_config_document(c, json{{"max_tokens", "many"}}); }), "max_tokens");
  EXPECT_EQ(field_of([&] { apply_config_document(c, json{{"backend", "local"}}); }), "backend");
  EXPECT_EQ(field_of([&] { apply_config_document(c, json{{"timeouts", {{"test", 0}}}}); }), "timeouts.test");
  EXPECT_EQ(field_of([&] { apply_config_document(c, json{{"timeouts", {{"tset", 1}}}}); }), "timeouts.tset");
  EXPECT_EQ(field_of([&] { apply_config_document(c, json::array()); }), "config");
}

TEST(Config, FileAllowsComments) {
  TempDir dir;
  const auto path = dir.path() / "ratg.json";
  std::ofstream(path) << "{\n  // tokens\n  \"max_tokens\": 100\n}\n";
  RunConfig c;
  apply_config_file(c, path);
  EXPECT_EQ(c.max_tokens, 100);
  EXPECT_THROW(apply_config_file(c, dir.path() / "missing.json"), Error);
}

TEST(Config, EnvironmentOverridesDocument) {
  RunConfig c;
  apply_config_document(c, json{{"gopls_path", "/from/config"}, {"llm_endpoint", "http://config"}});
  apply_environment(c, env_of({{"RATG_GOPLS", "/from/env"}, {"RATG_LLM_TOKEN", "secret"}}));
  EXPECT_EQ(c.gopls_path, "/from/env");
  EXPECT_EQ(c.llm_endpoint, "http://config");
  EXPECT_EQ(c.llm_token, "secret");
  apply_environment(c, env_of({{"RATG_GOPLS", ""}}));
  EXPECT_EQ(c.gopls_path, "/from/env");
}

TEST(Config, SerializationOmitsToken) {
  RunConfig c;
  c.llm_token = "secret";
  const auto j = to_json(c);
  EXPECT_FALSE(j.contains("llm_token"));
  EXPECT_EQ(j.dump().find("secret"), std::string::npos);
  RunConfig back;
  apply_config_document(back, j);
  EXPECT_EQ(to_json(back), j);
}

TEST_F(ConfigValidation, ValidResolvesPaths) {
  config_.project_dir = config_.project_dir / "." / "";
  validate(config_, true);
  EXPECT_TRUE(config_.project_dir.is_absolute());
  EXPECT_EQ(config_.project_name, "mod");
}

TEST_F(ConfigValidation, InvalidFieldsAreNamed) {
  auto check = [&](const std::string& field, const std::function<void(RunConfig&)>& edit, bool gen = false) {
    RunConfig c = config_;
    edit(c);
    EXPECT_EQ(field_of([&] { validate(c, gen); }), field) << field;
  };
  check("project_dir", [](RunConfig& c) { c.project_dir.clear(); });
  check("project_dir", [&](RunConfig& c) { c.project_dir = dir_.path() / "scripts"; });
  check("run_dir", [](RunConfig& c) { c.run_dir.clear(); });
  check("run_dir", [](RunConfig& c) { c.run_dir = c.project_dir; });
  check("max_tokens", [](RunConfig& c) { c.max_tokens = 0; });
  check("candidates", [](RunConfig& c) { c.candidates = 0; });
  check("context_budget", [](RunConfig& c) { c.context_budget.limit = 0; });
  check("temperature", [](RunConfig& c) { c.temperature = -1; });
  check("name_pattern", [](RunConfig& c) { c.filter.name_pattern = "(["; });
  check("log_level", [](RunConfig& c) { c.log_level = "loud"; });
  check("import_fixer", [](RunConfig& c) { c.import_fixer = "/no/such/fixer"; });
  check("mutation_tool", [](RunConfig& c) { c.mutation_tool = "/no/such/tool"; });
  check("script_dir", [](RunConfig& c) { c.script_dir.clear(); }, true);
  check("llm_endpoint", [](RunConfig& c) { c.backend = Backend::remote; }, true);
  check("gopls_path", [](RunConfig& c) {
    c.fetch_enabled = true;
    c.gopls_path = "/no/such/gopls";
  }, true);
}

TEST_F(ConfigValidation, GenerationChecksOnlyWhenGenerating) {
  config_.script_dir.clear();
  config_.fetch_enabled = true;
  config_.gopls_path = "/no/such/gopls";
  EXPECT_NO_THROW(validate(config_, false));
}

}  // namespace
