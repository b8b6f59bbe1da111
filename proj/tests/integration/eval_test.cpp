#include <gtest/gtest.h>

#include <fstream>
#include <regex>
#include <sstream>

#include "json.hpp"
#include "ratg/eval.hpp"
#include "ratg/mutation.hpp"
#include "support/test_support.hpp"

namespace {

using namespace ratg;
using ratg::testing::FixtureCopy;
using ratg::testing::TempDir;
using json = nlohmann::json;
namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string golden(const std::string& name) { return slurp(ratg::testing::test_data_dir() / "golden" / name); }

class EvalTest : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!ratg::testing::go_available()) GTEST_SKIP() << "go toolchain not installed";
  }
};

const std::string kEmptyBody = "package calc\n\nimport \"testing\"\n\nfunc TestNothing(t *testing.T) {\n}\n";
const std::string kAddTest =
    "package calc\n\nimport \"testing\"\n\nfunc TestAdd(t *testing.T) {\n\tif Add(2, 3) != 5 {\n\t\tt.Fatal(\"Add(2, 3) != 5\")\n\t}\n}\n";
const std::string kSubTest =
    "package calc\n\nimport \"testing\"\n\nfunc TestSub(t *testing.T) {\n\tif Sub(5, 3) != 2 {\n\t\tt.Fatal(\"Sub(5, 3) != 2\")\n\t}\n}\n";

using CompileCheck = EvalTest;

TEST_F(CompileCheck, GoldenCandidateCompilesAndIsRemoved) {
  FixtureCopy fx;
  const auto dir = fx.path() / "stack";
  const auto before = directory_checksums(fx.path());
  auto r = compile_check(golden("stack.Stack.Push_1_test.go"), dir, "ratg_push_1_test.go");
  EXPECT_EQ(r.status, CompileStatus::compiled) << r.output;
  EXPECT_TRUE(r.diagnostics.empty());
  EXPECT_FALSE(fs::exists(dir / "ratg_push_1_test.go"));
  EXPECT_EQ(directory_checksums(fx.path()), before);
}

TEST_F(CompileCheck, NoValueCallUsedAsValue) {
  FixtureCopy fx;
  auto r = compile_check(golden("noret.Reply_1.withheld_test.go"), fx.path() / "noret", "ratg_reply_1_test.go");
  ASSERT_EQ(r.status, CompileStatus::compile_error);
  ASSERT_FALSE(r.diagnostics.empty());
  bool found = false;
  for (const auto& d : r.diagnostics) {
    if (d.message.find("used as value") != std::string::npos) {
      found = true;
      EXPECT_EQ(d.file, "ratg_reply_1_test.go");
      EXPECT_EQ(d.line, 11);
    }
  }
  EXPECT_TRUE(found) << r.output;
  EXPECT_EQ(compile_check(golden("noret.Reply_1_test.go"), fx.path() / "noret", "ratg_reply_1_test.go").status,
            CompileStatus::compiled);
}

TEST_F(CompileCheck, EmptyBodyCompiles) {
  FixtureCopy fx;
  EXPECT_EQ(compile_check(kEmptyBody, fx.path() / "calc", "ratg_empty_test.go").status, CompileStatus::compiled);
}

TEST_F(CompileCheck, FourCandidateSetRate) {
  FixtureCopy fx;
  std::vector<CompileResult> rs;
  rs.push_back(compile_check(golden("stack.Stack.Push_1_test.go"), fx.path() / "stack", "ratg_a_test.go"));
  rs.push_back(compile_check(kEmptyBody, fx.path() / "calc", "ratg_b_test.go"));
  rs.push_back(compile_check(kAddTest, fx.path() / "calc", "ratg_c_test.go"));
  rs.push_back(compile_check(golden("noret.Reply_1.withheld_test.go"), fx.path() / "noret", "ratg_d_test.go"));
  EXPECT_EQ(compile_rate(rs), 0.75);
  for (const auto& r : rs)
    if (r.status == CompileStatus::compile_error) EXPECT_FALSE(r.diagnostics.empty());
}

TEST_F(CompileCheck, UnparseableFailureStillCarriesADiagnostic) {
  TempDir dir;  // no go.mod anywhere above a temp dir
  auto r = compile_check("package x\n", dir.path(), "x_test.go");
  EXPECT_EQ(r.status, CompileStatus::compile_error);
  ASSERT_FALSE(r.diagnostics.empty());
  EXPECT_FALSE(r.diagnostics[0].message.empty());
}

using RunTests = EvalTest;

TEST_F(RunTests, TwoPassingGeneratedTests) {
  FixtureCopy fx;
  const auto dir = fx.path() / "calc";
  spit(dir / "ratg_add_test.go", kAddTest);
  spit(dir / "ratg_sub_test.go", kSubTest);
  TestRunOptions opts;
  opts.expected_tests = {"TestAdd", "TestSub"};
  auto r = run_tests_with_coverage(dir, opts);
  EXPECT_FALSE(r.package_error) << *r.package_error;
  EXPECT_EQ(r.tests, (std::map<std::string, TestStatus>{{"TestAdd", TestStatus::passed}, {"TestSub", TestStatus::passed}}));
  EXPECT_TRUE(r.all_passed());
  // Add and Sub span two profiled lines each out of twelve.
  EXPECT_EQ(r.coverage.total_lines(), 12u);
  EXPECT_EQ(r.coverage.covered_lines(), 4u);
  EXPECT_GT(r.coverage.line_coverage, 0.0);
}

TEST_F(RunTests, FilterSelectsTests) {
  FixtureCopy fx;
  const auto dir = fx.path() / "calc";
  spit(dir / "ratg_add_test.go", kAddTest);
  spit(dir / "ratg_sub_test.go", kSubTest);
  TestRunOptions opts;
  opts.run_filter = "^TestSub$";
  auto r = run_tests_with_coverage(dir, opts);
  EXPECT_EQ(r.tests, (std::map<std::string, TestStatus>{{"TestSub", TestStatus::passed}}));
  EXPECT_EQ(r.coverage.covered_lines(), 2u);
}

TEST_F(RunTests, FailingCandidateFails) {
  FixtureCopy fx;
  const auto dir = fx.path() / "calc";
  spit(dir / "ratg_add_test.go", kAddTest);
  spit(dir / "ratg_bad_test.go",
       "package calc\n\nimport \"testing\"\n\nfunc TestBad(t *testing.T) {\n\tif Max(1, 2) != 1 {\n\t\tt.Error(\"wrong\")\n\t}\n}\n");
  auto r = run_tests_with_coverage(dir);
  EXPECT_FALSE(r.package_error);
  EXPECT_EQ(r.tests.at("TestAdd"), TestStatus::passed);
  EXPECT_EQ(r.tests.at("TestBad"), TestStatus::failed);
  EXPECT_FALSE(r.all_passed());
  EXPECT_GT(r.coverage.total_lines(), 0u);
}

TEST_F(RunTests, InfiniteLoopTimesOut) {
  FixtureCopy fx;
  const auto dir = fx.path() / "loops";
  spit(dir / "ratg_spin_test.go",
       "package loops\n\nimport \"testing\"\n\nfunc TestFirst(t *testing.T) {}\n\n"
       "func TestSpin(t *testing.T) {\n\tfor SumBelow(3) == 3 {\n\t}\n}\n\n"
       "func TestAfter(t *testing.T) {}\n");
  TestRunOptions opts;
  opts.timeout = std::chrono::seconds(2);
  opts.expected_tests = {"TestFirst", "TestSpin", "TestAfter"};
  auto r = run_tests_with_coverage(dir, opts);
  EXPECT_TRUE(r.timed_out);
  EXPECT_EQ(r.tests.at("TestFirst"), TestStatus::passed);
  EXPECT_EQ(r.tests.at("TestSpin"), TestStatus::timeout);
  EXPECT_EQ(r.tests.at("TestAfter"), TestStatus::timeout);
  EXPECT_FALSE(r.all_passed());
}

TEST_F(RunTests, BuildFailureIsAPackageError) {
  FixtureCopy fx;
  const auto dir = fx.path() / "noret";
  spit(dir / "ratg_reply_test.go", golden("noret.Reply_1.withheld_test.go"));
  TestRunOptions opts;
  opts.expected_tests = {"TestReply"};
  auto r = run_tests_with_coverage(dir, opts);
  ASSERT_TRUE(r.package_error);
  EXPECT_NE(r.package_error->find("used as value"), std::string::npos) << *r.package_error;
  EXPECT_EQ(r.tests.at("TestReply"), TestStatus::failed);
  EXPECT_EQ(r.coverage.total_lines(), 0u);
}

using Coverage = EvalTest;

TEST_F(Coverage, MatchesToolchainReporterOnFixtureProfile) {
  FixtureCopy fx;
  const auto dir = fx.path() / "stack";
  const auto data = ratg::testing::test_data_dir() / "coverage";
  fs::copy_file(data / "stack_suite_test.go", dir / "stack_suite_test.go");
  const auto oracle = json::parse(slurp(data / "stack_suite.oracle.json"));
  GoToolchain go;
  const auto profile = fx.path() / "cover.out";
  auto run = run_command(go.executable(), {"test", "-count=1", "-coverprofile=" + profile.string(), "."}, dir,
                         std::chrono::minutes(2), go.env);
  ASSERT_EQ(run.exit_code, 0) << run.output;
  auto report = parse_coverprofile(slurp(profile));

  std::map<int, bool> expected;
  for (int l : oracle["covered_lines"]) expected[l] = true;
  for (int l : oracle["uncovered_lines"]) expected[l] = false;
  ASSERT_EQ(report.files.size(), 1u);
  EXPECT_EQ(report.files.begin()->second, expected);
  EXPECT_DOUBLE_EQ(report.line_coverage, oracle["line_coverage"].get<double>());

  auto func = run_command(go.executable(), {"tool", "cover", "-func=" + profile.string()}, dir,
                          std::chrono::minutes(1), go.env);
  ASSERT_EQ(func.exit_code, 0) << func.output;
  std::smatch m;
  ASSERT_TRUE(std::regex_search(func.output, m, std::regex(R"(total:\s+\(statements\)\s+([0-9.]+)%)")));
  const double toolchain_total = std::stod(m[1]) / 100.0;
  EXPECT_NEAR(report.line_coverage, toolchain_total, oracle["tolerance"].get<double>());

  // The same numbers through the harness runner.
  fs::remove(profile);
  auto harness = run_tests_with_coverage(dir);
  EXPECT_DOUBLE_EQ(harness.coverage.line_coverage, report.line_coverage);
}

TEST_F(Coverage, AddingAPassingTestNeverLowersCoverage) {
  FixtureCopy fx;
  const auto dir = fx.path() / "stack";
  fs::copy_file(ratg::testing::test_data_dir() / "coverage" / "stack_suite_test.go", dir / "stack_suite_test.go");
  spit(dir / "ratg_push_test.go", golden("stack.Stack.Push_1_test.go"));
  const std::vector<std::vector<std::string>> chains = {
      {"TestLen", "TestPopEmpty", "TestPush", "TestPopFull"},
      {"TestPush", "TestPopFull", "TestLen", "TestPopEmpty"},
  };
  for (const auto& chain : chains) {
    double previous = 0.0;
    std::string filter;
    for (const auto& name : chain) {
      filter += (filter.empty() ? "" : "|") + name;
      TestRunOptions opts;
      opts.run_filter = "^(" + filter + ")$";
      auto r = run_tests_with_coverage(dir, opts);
      ASSERT_TRUE(r.all_passed()) << r.output;
      EXPECT_GE(r.coverage.line_coverage, previous) << filter;
      EXPECT_LE(r.coverage.line_coverage, 1.0);
      previous = r.coverage.line_coverage;
    }
  }
}

using Mutation = EvalTest;

TEST_F(Mutation, LoopsSuiteMatchesOracleTable) {
  FixtureCopy fx;
  const auto dir = fx.path() / "loops";
  const auto data = ratg::testing::test_data_dir() / "mutation";
  fs::copy_file(data / "loops_suite_test.go", dir / "loops_suite_test.go");
  const auto oracle = json::parse(slurp(data / "loops_run.oracle.json"));

  auto baseline = run_tests_with_coverage(dir);
  ASSERT_TRUE(baseline.all_passed()) << baseline.output;
  const auto before = directory_checksums(fx.path());

  MutationOptions opts;
  opts.timeout = std::chrono::seconds(3);
  auto run = mutation_run(dir, micro_mutate(dir), baseline.coverage, opts);
  EXPECT_EQ(directory_checksums(fx.path()), before);

  ASSERT_EQ(run.mutants.size(), oracle["statuses"].size());
  for (std::size_t i = 0; i < run.mutants.size(); ++i) {
    const auto& m = run.mutants[i];
    const auto& o = oracle["statuses"][i];
    EXPECT_EQ(m.line, o["line"].get<int>());
    EXPECT_EQ(m.original_text, o["original"].get<std::string>());
    ASSERT_TRUE(m.status);
    EXPECT_EQ(to_string(*m.status), o["status"].get<std::string>()) << m.id << " " << m.original_text;
  }
  EXPECT_EQ(run.summary.killed, oracle["killed"].get<std::size_t>());
  EXPECT_EQ(run.summary.covered(), oracle["covered"].get<std::size_t>());
  EXPECT_EQ(run.summary.total, oracle["total"].get<std::size_t>());
  EXPECT_LE(run.summary.killed, run.summary.covered());
  EXPECT_LE(run.summary.covered(), run.summary.total);
  EXPECT_DOUBLE_EQ(run.summary.mutator_coverage(), 0.75);
}

TEST_F(Mutation, ArithmeticFlipIsKilledByExactAssertion) {
  FixtureCopy fx;
  const auto dir = fx.path() / "calc";
  spit(dir / "ratg_add_test.go", kAddTest);
  auto baseline = run_tests_with_coverage(dir);
  ASSERT_TRUE(baseline.all_passed());
  auto run = mutation_run(dir, micro_mutate(dir), baseline.coverage);
  std::map<int, MutantStatus> by_line;
  for (const auto& m : run.mutants) by_line[m.line] = *m.status;
  EXPECT_EQ(by_line.at(7), MutantStatus::killed);        // a + b
  EXPECT_EQ(by_line.at(13), MutantStatus::not_covered);  // a - b
  EXPECT_EQ(by_line.at(19), MutantStatus::not_covered);  // a > b
  EXPECT_EQ(run.summary.killed, 1u);
  EXPECT_EQ(run.summary.not_covered, run.summary.total - 1);
}

TEST_F(Mutation, UncompilableMutantsAreSkipped) {
  TempDir mod;
  spit(mod.path() / "go.mod", "module example.com/flags\n\ngo 1.21\n");
  const std::string src =
      "package flags\n\n// Enabled looks b up in a fixed table.\nfunc Enabled(b bool) int {\n"
      "\treturn map[bool]int{true: 1, false: 0}[b]\n}\n";
  spit(mod.path() / "flags.go", src);
  spit(mod.path() / "flags_test.go",
       "package flags\n\nimport \"testing\"\n\nfunc TestEnabled(t *testing.T) {\n\tif Enabled(true) != 1 {\n\t\tt.Fatal(\"x\")\n\t}\n}\n");
  auto baseline = run_tests_with_coverage(mod.path());
  ASSERT_TRUE(baseline.all_passed()) << baseline.output;
  auto run = mutation_run(mod.path(), micro_mutate(mod.path()), baseline.coverage);
  ASSERT_EQ(run.mutants.size(), 2u);
  for (const auto& m : run.mutants) EXPECT_EQ(m.status, MutantStatus::compile_skipped);
  EXPECT_EQ(run.summary.covered(), 0u);
  EXPECT_EQ(run.summary.mutator_coverage(), 0.0);
  EXPECT_EQ(slurp(mod.path() / "flags.go"), src);
}

TEST_F(Mutation, RestoreFailureIsFatal) {
  TempDir mod;
  spit(mod.path() / "go.mod", "module example.com/r\n\ngo 1.21\n");
  spit(mod.path() / "r.go", "package r\n\n// F compares.\nfunc F(a, b int) bool {\n\treturn a == b\n}\n");
  auto ms = micro_mutate(mod.path());
  ASSERT_EQ(ms.size(), 1u);
  auto coverage = parse_coverprofile("mode: set\nexample.com/r/r.go:4.25,6.2 1 1\n");
  // A toolchain stand-in that turns the source file into a directory.
  const auto fake = mod.path() / "fake-go";
  spit(fake, "#!/bin/sh\nrm -f \"$PWD/r.go\"\nmkdir \"$PWD/r.go\"\nexit 0\n");
  fs::permissions(fake, fs::perms::owner_all);
  GoToolchain go;
  go.go = fake.string();
  EXPECT_THROW(mutation_run(mod.path(), ms, coverage, {}, go), RestoreError);
}

}  // namespace
