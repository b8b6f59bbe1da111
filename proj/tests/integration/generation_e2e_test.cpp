#include <gtest/gtest.h>

#include <chrono>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ratg/eval.hpp"
#include "ratg/generation.hpp"
#include "support/test_support.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ratg;
using json = nlohmann::json;
using ratg::testing::FixtureCopy;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path data(const std::string& rel) { return ratg::testing::test_data_dir() / rel; }

class EndToEnd : public ::testing::Test {
 protected:
  void SetUp() override {
    server_path_ = ratg::testing::language_server();
    if (!server_path_) GTEST_SKIP() << "no language server available";
    if (!ratg::testing::go_available()) GTEST_SKIP() << "go toolchain not installed";
  }

  struct Run {
    TestCandidate candidate;
    std::string file;
    std::vector<bool> branches;
  };

  Run generate_for(const fs::path& root, const std::string& focal_id, const std::string& script, bool fetch) {
    auto module = load_module(root);
    auto scan = scan_module(module);
    const FocalUnit* unit = nullptr;
    for (const auto& u : scan.units)
      if (u.id() == focal_id) unit = &u;
    if (!unit) throw std::runtime_error("no focal unit " + focal_id);

    auto generator = ScriptedGenerator::from_file(data("scripts/" + script));
    auto store = ContextStore::with_go_builtins();
    GenerationConfig config;
    config.fetch_enabled = fetch;
    Run run;
    if (fetch) {
      ServerOptions opts;
      opts.executable = *server_path_;
      opts.extra_env = GoToolchain{}.env;
      auto server = ServerHandle::start(root, opts);
      LanguageServerFetcher fetcher(server);
      run.candidate = generate(*unit, generator, &fetcher, store, module, config);
      server.shutdown();
    } else {
      run.candidate = generate(*unit, generator, nullptr, store, module, config);
    }
    run.file = assemble_test_file(run.candidate, unit->package_name);
    run.branches = generator.branches_taken();
    return run;
  }

  std::optional<std::string> server_path_;
};

TEST_F(EndToEnd, StackPushMatchesGoldenAndFetchOracle) {
  FixtureCopy fx;
  const auto before = directory_checksums(fx.path());
  const auto oracle = json::parse(slurp(data("oracles/stack.Stack.Push_1.fetchlog.json")));
  const std::string golden = slurp(data("golden/stack.Stack.Push_1_test.go"));

  const auto start = std::chrono::steady_clock::now();
  std::optional<json> first;
  for (int i = 0; i < 5; ++i) {
    auto run = generate_for(fx.path(), "stack.Stack.Push", "stack.Stack.Push_1.tokens", true);
    EXPECT_EQ(run.file, golden);
    EXPECT_EQ(to_string(run.candidate.stop_reason), oracle["stop_reason"].get<std::string>());

    const auto& log = run.candidate.fetch_log;
    ASSERT_EQ(log.size(), oracle["fetch_log"].size());
    for (std::size_t k = 0; k < log.size(); ++k) {
      const auto& o = oracle["fetch_log"][k];
      EXPECT_EQ(log[k].identifier, o["identifier"].get<std::string>()) << k;
      EXPECT_EQ(to_string(log[k].outcome), o["outcome"].get<std::string>()) << log[k].identifier;
      EXPECT_EQ(log[k].token_index == 0, o.value("seed", false)) << log[k].identifier;
    }
    auto doc = to_json(run.candidate);
    doc["final_prompt"] = run.candidate.final_prompt;
    if (!first) first = doc;
    else EXPECT_EQ(doc, *first) << "run " << i;
  }
  const auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_LT(elapsed, std::chrono::seconds(60));
  EXPECT_EQ(directory_checksums(fx.path()), before);

  auto compiled = compile_check(golden, fx.path() / "stack", "ratg_push_1_test.go");
  EXPECT_EQ(compiled.status, CompileStatus::compiled) << compiled.output;
}

TEST_F(EndToEnd, FetchedDefinitionAvoidsUsingNoValueResult) {
  FixtureCopy fx;
  auto fetched = generate_for(fx.path(), "noret.Reply", "noret.Reply_1.tokens", true);
  EXPECT_EQ(fetched.branches, std::vector<bool>{true});
  EXPECT_EQ(fetched.file, slurp(data("golden/noret.Reply_1_test.go")));
  EXPECT_NE(fetched.candidate.final_prompt.find("FIXTURE-DOC String"), std::string::npos);
  auto ok = compile_check(fetched.file, fx.path() / "noret", "ratg_reply_1_test.go");
  EXPECT_EQ(ok.status, CompileStatus::compiled) << ok.output;

  auto withheld = generate_for(fx.path(), "noret.Reply", "noret.Reply_1.tokens", false);
  EXPECT_EQ(withheld.branches, std::vector<bool>{false});
  EXPECT_EQ(withheld.file, slurp(data("golden/noret.Reply_1.withheld_test.go")));
  auto bad = compile_check(withheld.file, fx.path() / "noret", "ratg_reply_1_test.go");
  ASSERT_EQ(bad.status, CompileStatus::compile_error);
  bool used_as_value = false;
  for (const auto& d : bad.diagnostics) used_as_value |= d.message.find("used as value") != std::string::npos;
  EXPECT_TRUE(used_as_value) << bad.output;
}

}  // namespace
