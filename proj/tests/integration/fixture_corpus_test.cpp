#include <gtest/gtest.h>

#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "ratg/eval.hpp"
#include "ratg/process.hpp"
#include "support/test_support.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ratg;

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<fs::path> go_files() {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(ratg::testing::fixtures_dir()))
    if (e.path().extension() == ".go") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

TEST(FixtureCorpus, ChecksumsMatchCommittedValues) {
  std::map<std::string, std::string> expected;
  for (const auto& line : lines_of(ratg::testing::test_data_dir() / "fixtures.sha256")) {
    if (line.empty()) continue;
    expected[line.substr(66)] = line.substr(0, 64);
  }
  ASSERT_FALSE(expected.empty());
  std::map<std::string, std::string> actual;
  for (const auto& e : fs::recursive_directory_iterator(ratg::testing::fixtures_dir())) {
    if (!e.is_regular_file()) continue;
    actual[fs::relative(e.path(), ratg::testing::fixtures_dir()).generic_string()] = sha256_file(e.path());
  }
  EXPECT_EQ(actual, expected);
}

TEST(FixtureCorpus, EveryExportedDeclarationCarriesItsMarker) {
  const std::regex decl(R"(^(?:func (?:\([^)]*\) )?|type |var |const )([A-Za-z_]\w*))");
  std::set<std::string> markers;
  std::size_t exported = 0;
  for (const auto& file : go_files()) {
    const auto lines = lines_of(file);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      std::smatch m;
      if (!std::regex_search(lines[i], m, decl)) continue;
      const std::string name = m[1];
      if (!std::isupper(static_cast<unsigned char>(name[0]))) continue;
      ++exported;
      bool found = false;
      for (std::size_t j = i; j-- > 0 && lines[j].rfind("//", 0) == 0;) {
        if (lines[j] == "// FIXTURE-DOC " + name) found = true;
      }
      EXPECT_TRUE(found) << file << ": " << name;
      EXPECT_TRUE(markers.insert(name).second) << "duplicate marker " << name;
    }
  }
  EXPECT_GE(exported, 20u);
}

TEST(FixtureCorpus, BuildsAndVetsCleanly) {
  if (!ratg::testing::go_available()) GTEST_SKIP() << "go toolchain not installed";
  GoToolchain go;
  for (const std::string command : {"build", "vet"}) {
    const auto r = run_command(go.executable(), {command, "./..."}, ratg::testing::fixtures_dir(),
                               std::chrono::minutes(2), go.env);
    EXPECT_EQ(r.exit_code, 0) << command << ": " << r.output;
    EXPECT_EQ(r.output, "") << command;
  }
}

}  // namespace
