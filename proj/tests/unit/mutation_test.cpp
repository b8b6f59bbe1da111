#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "ratg/mutation.hpp"
#include "support/test_support.hpp"

namespace {

using namespace ratg;
using json = nlohmann::json;
namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(MicroMutate, EqualityBecomesInequality) {
  const std::string src = "package p\n\nfunc f(a, b int) bool {\n\tif a == b {\n\t\treturn true\n\t}\n\treturn false\n}\n";
  auto ms = mutate_source(src, "p.go");
  ASSERT_EQ(ms.size(), 3u);
  EXPECT_EQ(ms[0].original_text, "==");
  EXPECT_EQ(ms[0].mutated_text, "!=");
  EXPECT_EQ(ms[0].op, MutationOperator::relational_flip);
  EXPECT_EQ(ms[0].line, 4);
  EXPECT_EQ(apply_mutant(src, ms[0]).find("if a != b {"), src.find("if a == b {"));
  EXPECT_EQ(ms[1].op, MutationOperator::boolean_flip);
  EXPECT_EQ(ms[2].mutated_text, "true");
}

TEST(MicroMutate, StringConcatenationIsSkipped) {
  EXPECT_TRUE(mutate_source("package p\n\nvar s = \"a\" + \"b\"\n", "p.go").empty());
  EXPECT_TRUE(mutate_source("package p\n\nfunc f(x string) string { return x + `b` }\n", "p.go").empty());
  EXPECT_TRUE(mutate_source("package p\n\nfunc f(x string) string { return \"a\" + x }\n", "p.go").empty());
  EXPECT_EQ(mutate_source("package p\n\nfunc f(x, y string) string { return x + y }\n", "p.go").size(), 1u);
}

TEST(MicroMutate, UnaryOperatorsAndCompoundAssignmentsAreSkipped) {
  auto ms = mutate_source("package p\n\nfunc f(x int) int {\n\tx += 1\n\tx -= 2\n\treturn -x + (+x)\n}\n", "p.go");
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_EQ(ms[0].original_text, "+");
  EXPECT_EQ(ms[0].line, 6);
}

TEST(MicroMutate, IgnoresCommentsAndLiterals) {
  const std::string src =
      "package p\n\n// a == b, i++ and true\n/* x < y */\n"
      "var s = \"a < b == c\"\nvar r = '<'\nvar raw = `i--`\n";
  EXPECT_TRUE(mutate_source(src, "p.go").empty());
}

TEST(MicroMutate, EveryOperatorPair) {
  const std::vector<std::pair<std::string, std::string>> pairs = {
      {"==", "!="}, {"!=", "=="}, {"<", ">="}, {">=", "<"}, {">", "<="}, {"<=", ">"}};
  for (const auto& [from, to] : pairs) {
    auto ms = mutate_source("package p\n\nvar b = x " + from + " y\n", "p.go");
    ASSERT_EQ(ms.size(), 1u) << from;
    EXPECT_EQ(ms[0].mutated_text, to);
  }
  auto inc = mutate_source("package p\n\nfunc f() {\n\ti++\n\tj--\n}\n", "p.go");
  ASSERT_EQ(inc.size(), 2u);
  EXPECT_EQ(inc[0].mutated_text, "--");
  EXPECT_EQ(inc[1].mutated_text, "++");
  EXPECT_EQ(inc[0].op, MutationOperator::increment_decrement_flip);
  auto sub = mutate_source("package p\n\nvar d = f(1)[0] - g.h\n", "p.go");
  ASSERT_EQ(sub.size(), 1u);
  EXPECT_EQ(sub[0].mutated_text, "+");
}

// Builds sources from fragments whose mutant sites are known up front.
TEST(MicroMutate, MatchesConstructedSitesOnRandomSources) {
  struct Fragment {
    std::string text;
    std::vector<std::pair<std::string, std::string>> sites;
  };
  const std::vector<Fragment> fragments = {
      {"a == b", {{"==", "!="}}},
      {"a != b", {{"!=", "=="}}},
      {"a < b", {{"<", ">="}}},
      {"a >= b", {{">=", "<"}}},
      {"len(a) > b[0]", {{">", "<="}}},
      {"a <= b", {{"<=", ">"}}},
      {"a + b", {{"+", "-"}}},
      {"f(a) - b", {{"-", "+"}}},
      {"-a", {}},
      {"\"x\" + a", {}},
      {"a + \"x\"", {}},
      {"\"a == b\"", {}},
      {"'<'", {}},
      {"`i++`", {}},
      {"true", {{"true", "false"}}},
      {"!false", {{"false", "true"}}},
      {"a * b % c", {}},
      {"a << 2", {}},
      {"<-ch", {}},
  };
  std::mt19937 rng(99);
  for (int trial = 0; trial < 400; ++trial) {
    std::string src = "package p\n\nfunc f() {\n";
    std::vector<std::pair<std::string, std::string>> expected;
    const int n = static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      switch (rng() % 4) {
        case 0:
          src += "\t// a == b + c\n";
          break;
        case 1:
          src += "\ti++\n";
          expected.push_back({"++", "--"});
          break;
        default: {
          const auto& f = fragments[rng() % fragments.size()];
          src += "\t_ = " + f.text + "\n";
          expected.insert(expected.end(), f.sites.begin(), f.sites.end());
        }
      }
    }
    src += "}\n";
    auto ms = mutate_source(src, "p.go");
    ASSERT_EQ(ms.size(), expected.size()) << src;
    for (std::size_t i = 0; i < ms.size(); ++i) {
      ASSERT_EQ(ms[i].original_text, expected[i].first) << src;
      ASSERT_EQ(ms[i].mutated_text, expected[i].second) << src;
      ASSERT_NE(ms[i].original_text, ms[i].mutated_text);
      ASSERT_EQ(src.substr(ms[i].byte_span.start, ms[i].byte_span.end - ms[i].byte_span.start), ms[i].original_text);
      if (i > 0) ASSERT_LT(ms[i - 1].byte_span.start, ms[i].byte_span.start);
    }
  }
}

TEST(MicroMutate, LoopsFixtureMatchesHandEnumeratedOracle) {
  const auto oracle = json::parse(slurp(ratg::testing::test_data_dir() / "mutation/loops_mutants.oracle.json"));
  const auto dir = ratg::testing::fixtures_dir() / "loops";
  const auto before = directory_checksums(dir);
  auto ms = micro_mutate(dir);
  EXPECT_EQ(directory_checksums(dir), before);
  ASSERT_EQ(ms.size(), oracle["mutants"].size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const auto& o = oracle["mutants"][i];
    EXPECT_EQ(ms[i].file, "loops.go");
    EXPECT_EQ(ms[i].line, o["line"].get<int>()) << i;
    EXPECT_EQ(ms[i].original_text, o["original"].get<std::string>()) << i;
    EXPECT_EQ(ms[i].mutated_text, o["mutated"].get<std::string>()) << i;
    EXPECT_EQ(to_string(ms[i].op), o["operator"].get<std::string>()) << i;
    EXPECT_FALSE(ms[i].status.has_value());
  }
  auto again = micro_mutate(dir);
  ASSERT_EQ(again.size(), ms.size());
  for (std::size_t i = 0; i < ms.size(); ++i) EXPECT_EQ(to_json(again[i]), to_json(ms[i]));
}

TEST(MicroMutate, OrdersByFileThenOffsetAndSkipsTests) {
  ratg::testing::TempDir dir;
  std::ofstream(dir.path() / "b.go") << "package p\n\nvar x = 1 < 2\n";
  std::ofstream(dir.path() / "a.go") << "package p\n\nvar y = true\nvar z = 1 == 2\n";
  std::ofstream(dir.path() / "a_test.go") << "package p\n\nvar w = 1 > 2\n";
  auto ms = micro_mutate(dir.path());
  ASSERT_EQ(ms.size(), 3u);
  EXPECT_EQ(ms[0].file, "a.go");
  EXPECT_EQ(ms[0].original_text, "true");
  EXPECT_EQ(ms[1].original_text, "==");
  EXPECT_EQ(ms[2].file, "b.go");
  EXPECT_EQ(ms[0].id, "a.go@" + std::to_string(ms[0].byte_span.start));
}

TEST(Mutant, ApplyRejectsStaleSpans) {
  auto ms = mutate_source("package p\n\nvar b = x == y\n", "p.go");
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_THROW(apply_mutant("package p\n\nvar b = x != y\n", ms[0]), ArgumentError);
  auto bad = ms[0];
  bad.byte_span.end = 1000;
  EXPECT_THROW(apply_mutant("package p\n\nvar b = x == y\n", bad), ArgumentError);
}

TEST(Mutant, JsonRoundTrip) {
  auto ms = mutate_source("package p\n\nvar b = x <= y\n", "p.go");
  ms[0].status = MutantStatus::survived;
  auto back = mutant_from_json(to_json(ms[0]));
  EXPECT_EQ(to_json(back), to_json(ms[0]));
  ms[0].status.reset();
  EXPECT_TRUE(to_json(ms[0])["status"].is_null());
  EXPECT_FALSE(mutant_from_json(to_json(ms[0])).status.has_value());
}

TEST(MutationSummary, CountsAndCoverage) {
  std::vector<Mutant> ms(10);
  const MutantStatus statuses[] = {MutantStatus::killed,      MutantStatus::killed,   MutantStatus::killed,
                                   MutantStatus::survived,    MutantStatus::survived, MutantStatus::not_covered,
                                   MutantStatus::not_covered, MutantStatus::not_covered,
                                   MutantStatus::compile_skipped, MutantStatus::not_covered};
  for (std::size_t i = 0; i < ms.size(); ++i) ms[i].status = statuses[i];
  auto s = summarize(ms);
  EXPECT_EQ(s.total, 10u);
  EXPECT_EQ(s.killed, 3u);
  EXPECT_EQ(s.covered(), 5u);
  EXPECT_EQ(s.compile_skipped, 1u);
  EXPECT_EQ(s.mutator_coverage(), 0.5);
  EXPECT_EQ(summarize({}).mutator_coverage(), 0.0);
}

TEST(MutationRun, UncoveredMutantsAreNeverRun) {
  ratg::testing::TempDir dir;
  const std::string src = "package p\n\nfunc F(a, b int) bool {\n\treturn a == b\n}\n";
  std::ofstream(dir.path() / "p.go") << src;
  auto ms = micro_mutate(dir.path());
  auto coverage = parse_coverprofile("mode: set\nexample.com/p/p.go:3.24,5.2 1 0\n");
  GoToolchain go;
  go.go = "/nonexistent/go";  // would throw if a test run were attempted
  auto run = mutation_run(dir.path(), ms, coverage, {}, go);
  ASSERT_EQ(run.mutants.size(), 1u);
  EXPECT_EQ(run.mutants[0].status, MutantStatus::not_covered);
  EXPECT_EQ(run.summary.killed, 0u);
  EXPECT_EQ(run.summary.covered(), 0u);
  EXPECT_EQ(slurp(dir.path() / "p.go"), src);
}

TEST(GremlinsAdapter, ParsesSummary) {
  const std::string out =
      "Mutation testing completed in 1 minute 2 seconds\n"
      "Killed: 164, Lived: 50, Not covered: 671\n"
      "Timed out: 0, Not viable: 0, Skipped: 0\n"
      "Test efficacy: 76.64%\n"
      "Mutator coverage: 24.18%\n";
  auto s = GremlinsAdapter().parse(out);
  EXPECT_EQ(s.killed, 164u);
  EXPECT_EQ(s.survived, 50u);
  EXPECT_EQ(s.not_covered, 671u);
  EXPECT_EQ(s.total, 885u);
  EXPECT_NEAR(s.mutator_coverage(), 214.0 / 885.0, 1e-12);

  auto t = GremlinsAdapter().parse("Killed: 1, Lived: 2, Not covered: 3\nTimed out: 4, Not viable: 5\n");
  EXPECT_EQ(t.killed, 5u);
  EXPECT_EQ(t.compile_skipped, 5u);
  EXPECT_EQ(t.total, 15u);
  EXPECT_THROW(GremlinsAdapter().parse("nothing useful"), Error);
}

TEST(ExternalMutation, RunsToolAndParsesOutput) {
  ratg::testing::TempDir dir;
  const auto tool = dir.path() / "fake-gremlins";
  std::ofstream(tool) << "#!/bin/sh\necho \"Killed: 2, Lived: 1, Not covered: 1\"\necho \"dir=$1\" >&2\n";
  fs::permissions(tool, fs::perms::owner_all);
  auto s = run_external_mutation(tool.string(), {}, dir.path(), GremlinsAdapter());
  EXPECT_EQ(s.total, 4u);
  EXPECT_EQ(s.killed, 2u);
  EXPECT_THROW(run_external_mutation((dir.path() / "absent").string(), {}, dir.path(), GremlinsAdapter()),
               EnvironmentError);
}

}  // namespace
