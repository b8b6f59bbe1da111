#include <gtest/gtest.h>

#include <random>

#include "ratg/context_store.hpp"

namespace {

using namespace ratg;

ContextEntry entry(const std::string& id, int round, const std::string& body = "", bool doc = true) {
  ContextEntry e;
  e.identifier = id;
  e.definition_text = "type " + id + " struct{}" + body;
  if (doc) e.doc_comment = "// " + id + " is documented.";
  e.path = "pkg/" + id + ".go";
  e.position = {3, 5};
  e.fetch_round = round;
  return e;
}

TEST(ContextStore, ContainsInsertAndMiss) {
  ContextStore store;
  EXPECT_FALSE(store.contains("Stack"));
  EXPECT_TRUE(store.insert(entry("Stack", 0)));
  EXPECT_TRUE(store.contains("Stack"));
  EXPECT_FALSE(store.insert(entry("Stack", 4)));
  EXPECT_EQ(store.entries().size(), 1u);
  store.record_miss("Nope");
  EXPECT_TRUE(store.contains("Nope"));
  EXPECT_FALSE(store.insert(entry("Nope", 1)));
  store.record_miss("Stack");
  EXPECT_EQ(store.recorded_misses(), std::vector<std::string>{"Nope"});
}

TEST(ContextStore, BuiltinsAreKnownButNotRendered) {
  auto store = ContextStore::with_go_builtins();
  for (const char* name : {"if", "func", "int", "error", "any", "nil", "len", "true", "clear", "max"}) {
    EXPECT_TRUE(store.contains(name)) << name;
  }
  EXPECT_FALSE(store.contains("Stack"));
  EXPECT_TRUE(store.recorded_misses().empty());
  EXPECT_EQ(store.render(), "");
}

TEST(ContextStore, RendersBlocksInInsertionOrder) {
  ContextStore store;
  EXPECT_EQ(store.render(), "");
  store.insert(entry("B", 0));
  store.insert(entry("A", 2, "", false));
  EXPECT_EQ(store.render(), "// B is documented.\ntype B struct{}\n\ntype A struct{}");
}

TEST(ContextStore, EvictsOldestNonSeedFirst) {
  const std::string padding(200, 'x');
  ContextStore probe;
  const std::string seed = render_entry(entry("Seed", 0));
  const std::string n2 = render_entry(entry("N2", 7));
  const std::string n3 = render_entry(entry("N3", 9));
  const std::string expected = std::string(ContextStore::kElisionMarker) + "\n\n" + seed + "\n\n" + n2 + "\n\n" + n3;

  ContextStore store({expected.size(), BudgetUnit::characters});
  store.insert(entry("Seed", 0));
  store.insert(entry("N1", 5, padding));
  store.insert(entry("N2", 7));
  store.insert(entry("N3", 9));
  const auto out = store.render();
  EXPECT_EQ(out, expected);
  EXPECT_EQ(out.find("N1"), std::string::npos);
  EXPECT_EQ(store.entries().size(), 4u);
}

TEST(ContextStore, RenderRespectsBudgetAndSeedPriority) {
  std::mt19937 rng(99);
  for (int round = 0; round < 300; ++round) {
    std::uniform_int_distribution<int> count(0, 8), pad(0, 120), seedy(0, 2);
    std::uniform_int_distribution<std::size_t> budget(0, 900);
    ContextStore store({budget(rng), round % 2 ? BudgetUnit::tokens : BudgetUnit::characters});
    std::vector<ContextEntry> all;
    for (int i = 0, n = count(rng); i < n; ++i) {
      auto e = entry("E" + std::to_string(i), seedy(rng) == 0 ? 0 : i + 1, std::string(pad(rng), 'y'));
      all.push_back(e);
      store.insert(e);
    }
    const auto out = store.render();
    ASSERT_LE(measure(out, store.budget().unit), store.budget().limit);
    bool seed_dropped = false, non_seed_kept = false;
    for (const auto& e : all) {
      const bool present = out.find(render_entry(e)) != std::string::npos;
      if (e.fetch_round == 0 && !present) seed_dropped = true;
      if (e.fetch_round != 0 && present) non_seed_kept = true;
    }
    ASSERT_FALSE(seed_dropped && non_seed_kept) << out;
    const auto marker_count = [&] {
      std::size_t n = 0;
      for (auto p = out.find(ContextStore::kElisionMarker); p != std::string::npos;
           p = out.find(ContextStore::kElisionMarker, p + 1)) {
        ++n;
      }
      return n;
    }();
    ASSERT_LE(marker_count, 1u);
  }
}

TEST(ContextStore, UnlimitedRenderIsPrefixMonotone) {
  ContextStore store({std::numeric_limits<std::size_t>::max(), BudgetUnit::characters});
  std::string previous = store.render();
  for (int i = 0; i < 20; ++i) {
    store.insert(entry("T" + std::to_string(i), i % 3 == 0 ? 0 : i));
    if (i % 4 == 0) store.record_miss("m" + std::to_string(i));
    const auto now = store.render();
    ASSERT_EQ(now.rfind(previous, 0), 0u);
    previous = now;
  }
}

TEST(ContextStore, ContainsIsUnionOfEntriesAndMisses) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> name(0, 30), action(0, 1);
  ContextStore store;
  std::set<std::string> inserted, missed;
  for (int i = 0; i < 500; ++i) {
    const std::string id = "N" + std::to_string(name(rng));
    if (action(rng)) {
      if (store.insert(entry(id, 1))) inserted.insert(id);
    } else if (!store.contains(id)) {
      store.record_miss(id);
      missed.insert(id);
    }
  }
  for (int i = 0; i <= 30; ++i) {
    const std::string id = "N" + std::to_string(i);
    EXPECT_EQ(store.contains(id), inserted.count(id) + missed.count(id) > 0);
    EXPECT_FALSE(inserted.count(id) && missed.count(id));
  }
}

TEST(ContextStore, JsonRoundTrip) {
  auto store = ContextStore::with_go_builtins({1234, BudgetUnit::tokens});
  store.insert(entry("Stack", 0));
  store.insert(entry("Item", 3, "", false));
  store.record_miss("t");
  const auto j = store.to_json();
  const auto back = ContextStore::from_json(j);
  EXPECT_EQ(back.entries(), store.entries());
  EXPECT_EQ(back.recorded_misses(), store.recorded_misses());
  EXPECT_EQ(back.budget().limit, 1234u);
  EXPECT_EQ(back.budget().unit, BudgetUnit::tokens);
  EXPECT_TRUE(back.contains("if"));
  EXPECT_EQ(j["entries"][0]["location"]["path"], "pkg/Stack.go");
  EXPECT_EQ(j["entries"][1]["fetch_round"], 3);
}

TEST(Measure, TokenApproximation) {
  EXPECT_EQ(measure("func Add(a, b int)", BudgetUnit::tokens), 8u);
  EXPECT_EQ(measure("héllo", BudgetUnit::characters), 5u);
  EXPECT_EQ(measure("", BudgetUnit::tokens), 0u);
  EXPECT_THROW(budget_unit_from_string("bytes"), ConfigError);
}

}  // namespace
