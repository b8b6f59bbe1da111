#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ratg/fetcher.hpp"

namespace ratg {

enum class BudgetUnit { characters, tokens };

std::string_view to_string(BudgetUnit unit);
BudgetUnit budget_unit_from_string(std::string_view s);

/// Size of `text` in `unit`. Tokens are approximated lexically: each maximal
/// run of identifier characters and each other non-space character is one.
std::size_t measure(std::string_view text, BudgetUnit unit);

struct ContextBudget {
  std::size_t limit = 6000;
  BudgetUnit unit = BudgetUnit::characters;
};

/// The accumulated precise context of one generation run.
class ContextStore {
 public:
  static constexpr std::string_view kElisionMarker = "// ... earlier context omitted";

  explicit ContextStore(ContextBudget budget = {}) : budget_(budget) {}

  /// Go keywords and predeclared names are recorded as misses up front so
  /// they never reach the server.
  static ContextStore with_go_builtins(ContextBudget budget = {});

  bool contains(std::string_view identifier) const;
  /// Appends `entry` unless its identifier is already known.
  bool insert(ContextEntry entry);
  /// No-op for identifiers that are already known.
  void record_miss(const std::string& identifier);

  /// Entry blocks in insertion order, separated by blank lines, evicting
  /// oldest non-seed entries first when over budget.
  std::string render() const;

  const std::vector<ContextEntry>& entries() const noexcept { return entries_; }
  /// Misses recorded during the run, excluding the builtin preset.
  std::vector<std::string> recorded_misses() const;
  const ContextBudget& budget() const noexcept { return budget_; }
  /// Incremented whenever entries or misses change.
  std::size_t revision() const noexcept { return revision_; }

  nlohmann::json to_json() const;
  static ContextStore from_json(const nlohmann::json& j);

 private:
  ContextBudget budget_;
  std::vector<ContextEntry> entries_;
  std::set<std::string, std::less<>> identifiers_;
  std::set<std::string, std::less<>> misses_;
  std::set<std::string, std::less<>> builtin_misses_;
  std::size_t revision_ = 0;
  bool builtins_ = false;
};

/// doc_comment (if any) followed by definition_text.
std::string render_entry(const ContextEntry& entry);

nlohmann::json to_json(const ContextEntry& entry);
ContextEntry context_entry_from_json(const nlohmann::json& j);

}  // namespace ratg
