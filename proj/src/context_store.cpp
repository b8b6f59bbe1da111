#include "ratg/context_store.hpp"

#include <algorithm>

#include "ratg/go_lexer.hpp"
#include "ratg/text.hpp"

namespace ratg {

using nlohmann::json;

std::string_view to_string(BudgetUnit unit) { return unit == BudgetUnit::tokens ? "tokens" : "characters"; }

BudgetUnit budget_unit_from_string(std::string_view s) {
  if (s == "characters" || s == "chars") return BudgetUnit::characters;
  if (s == "tokens") return BudgetUnit::tokens;
  throw ConfigError("context_budget_unit", "expected 'characters' or 'tokens', got '" + std::string(s) + "'");
}

std::size_t measure(std::string_view s, BudgetUnit unit) {
  std::size_t count = 0;
  bool in_word = false;
  for (std::size_t i = 0; i < s.size();) {
    const auto d = text::decode_utf8(s, i);
    const char32_t c = d ? d->code_point : U'�';
    i += d ? d->length : 1;
    if (unit == BudgetUnit::characters) {
      ++count;
      continue;
    }
    if (text::is_identifier_char(c)) {
      if (!in_word) ++count;
      in_word = true;
      continue;
    }
    in_word = false;
    if (c != U' ' && c != U'\t' && c != U'\n' && c != U'\r') ++count;
  }
  return count;
}

ContextStore ContextStore::with_go_builtins(ContextBudget budget) {
  ContextStore store(budget);
  store.builtins_ = true;
  for (const auto& k : go::keywords()) store.builtin_misses_.emplace(k);
  for (const auto& p : go::predeclared()) store.builtin_misses_.emplace(p);
  return store;
}

bool ContextStore::contains(std::string_view identifier) const {
  return identifiers_.count(identifier) || misses_.count(identifier) || builtin_misses_.count(identifier);
}

bool ContextStore::insert(ContextEntry entry) {
  if (contains(entry.identifier)) return false;
  identifiers_.insert(entry.identifier);
  entries_.push_back(std::move(entry));
  ++revision_;
  return true;
}

void ContextStore::record_miss(const std::string& identifier) {
  if (contains(identifier)) return;
  misses_.insert(identifier);
  ++revision_;
}

std::vector<std::string> ContextStore::recorded_misses() const { return {misses_.begin(), misses_.end()}; }

std::string render_entry(const ContextEntry& entry) {
  if (entry.doc_comment && !entry.doc_comment->empty()) return *entry.doc_comment + "\n" + entry.definition_text;
  return entry.definition_text;
}

std::string ContextStore::render() const {
  std::vector<std::string> blocks;
  blocks.reserve(entries_.size());
  for (const auto& e : entries_) blocks.push_back(render_entry(e));

  auto assemble = [&](const std::vector<bool>& kept, bool elided) {
    std::string out;
    auto add = [&](std::string_view b) {
      if (!out.empty()) out += "\n\n";
      out += b;
    };
    if (elided) add(kElisionMarker);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (kept[i]) add(blocks[i]);
    }
    return out;
  };

  std::vector<bool> kept(blocks.size(), true);
  std::string out = assemble(kept, false);
  if (measure(out, budget_.unit) <= budget_.limit) return out;

  // Non-seed entries go first, oldest first; seeds only once none remain.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].fetch_round != 0) order.push_back(i);
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].fetch_round == 0) order.push_back(i);
  }
  for (const auto i : order) {
    kept[i] = false;
    out = assemble(kept, true);
    if (measure(out, budget_.unit) <= budget_.limit) return out;
  }
  return "";
}

json to_json(const ContextEntry& e) {
  json j = {{"identifier", e.identifier},
            {"definition_text", e.definition_text},
            {"doc_comment", e.doc_comment ? json(*e.doc_comment) : json(nullptr)},
            {"location", {{"path", e.path}, {"line", e.position.line}, {"character", e.position.character}}},
            {"fetch_round", e.fetch_round}};
  return j;
}

ContextEntry context_entry_from_json(const json& j) {
  ContextEntry e;
  e.identifier = j.at("identifier").get<std::string>();
  e.definition_text = j.at("definition_text").get<std::string>();
  if (j.contains("doc_comment") && !j["doc_comment"].is_null()) e.doc_comment = j["doc_comment"].get<std::string>();
  const auto& loc = j.at("location");
  e.path = loc.at("path").get<std::string>();
  e.position = {loc.at("line").get<std::uint32_t>(), loc.at("character").get<std::uint32_t>()};
  e.fetch_round = j.at("fetch_round").get<int>();
  return e;
}

json ContextStore::to_json() const {
  json entries = json::array();
  for (const auto& e : entries_) entries.push_back(ratg::to_json(e));
  return {{"budget", {{"limit", budget_.limit}, {"unit", to_string(budget_.unit)}}},
          {"builtin_misses", builtins_},
          {"entries", entries},
          {"misses", recorded_misses()}};
}

ContextStore ContextStore::from_json(const json& j) {
  ContextBudget budget;
  if (j.contains("budget")) {
    budget.limit = j["budget"].at("limit").get<std::size_t>();
    budget.unit = budget_unit_from_string(j["budget"].at("unit").get<std::string>());
  }
  ContextStore store = j.value("builtin_misses", false) ? with_go_builtins(budget) : ContextStore(budget);
  for (const auto& e : j.at("entries")) store.insert(context_entry_from_json(e));
  for (const auto& m : j.at("misses")) store.record_miss(m.get<std::string>());
  return store;
}

}  // namespace ratg
