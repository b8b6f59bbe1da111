#include "ratg/focal.hpp"

#include <algorithm>
#include <cwctype>
#include <fstream>
#include <future>
#include <regex>
#include <set>
#include <sstream>

#include "ratg/go_lexer.hpp"
#include "ratg/text.hpp"

namespace fs = std::filesystem;

namespace ratg {

std::string_view to_string(FocalKind kind) { return kind == FocalKind::method ? "method" : "function"; }

std::string FocalUnit::id() const {
  std::string out = package_name.empty() ? package_path : package_name;
  if (signature.receiver_type) out += "." + signature.receiver_type->name;
  out += "." + signature.name;
  return out;
}

bool is_exported(std::string_view identifier) {
  auto d = text::decode_utf8(identifier, 0);
  if (!d) return false;
  if (d->code_point < 0x80) return d->code_point >= 'A' && d->code_point <= 'Z';
  return iswupper(static_cast<wint_t>(d->code_point)) != 0;
}

namespace {

using go::Token;
using go::TokenKind;

bool is_op(const Token& t, std::string_view op) { return t.kind == TokenKind::op && t.text == op; }
bool is_kw(const Token& t, std::string_view kw) { return t.kind == TokenKind::keyword && t.text == kw; }

std::vector<Token> significant_tokens(std::string_view src) {
  auto all = go::tokenize(src);
  std::vector<Token> out;
  out.reserve(all.size());
  for (auto& t : all) {
    if (t.kind != TokenKind::comment) out.push_back(t);
  }
  return out;
}

bool is_opener(const Token& t) { return is_op(t, "(") || is_op(t, "[") || is_op(t, "{"); }
bool is_closer(const Token& t) { return is_op(t, ")") || is_op(t, "]") || is_op(t, "}"); }

char closer_for(std::string_view opener) {
  return opener == "(" ? ')' : opener == "[" ? ']' : '}';
}

// Index of the bracket closing the opener at `open`.
std::size_t match_close(const std::vector<Token>& toks, std::size_t open, std::size_t limit) {
  std::vector<char> stack;
  for (std::size_t i = open; i < limit; ++i) {
    const Token& t = toks[i];
    if (is_opener(t)) {
      stack.push_back(closer_for(t.text));
    } else if (is_closer(t)) {
      if (stack.empty() || stack.back() != t.text[0]) {
        throw SignatureError("mismatched '" + std::string(t.text) + "'", t.begin);
      }
      stack.pop_back();
      if (stack.empty()) return i;
    }
  }
  throw SignatureError("unbalanced '" + std::string(toks[open].text) + "'", toks[open].begin);
}

struct Range {
  std::size_t first;
  std::size_t last;  // exclusive
  bool empty() const { return first >= last; }
  std::size_t size() const { return last - first; }
};

// Splits [first, last) at top-level separators.
std::vector<Range> split_top_level(const std::vector<Token>& toks, Range r, std::string_view sep) {
  std::vector<Range> out;
  int depth = 0;
  std::size_t start = r.first;
  for (std::size_t i = r.first; i < r.last; ++i) {
    const Token& t = toks[i];
    if (is_opener(t)) ++depth;
    else if (is_closer(t)) --depth;
    else if (depth == 0 && (t.text == sep || (sep == ";" && t.kind == TokenKind::semicolon))) {
      out.push_back({start, i});
      start = i + 1;
    }
  }
  out.push_back({start, r.last});
  // A trailing separator leaves an empty final entry.
  if (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

void collect_type_identifiers(const std::vector<Token>& toks, Range r, std::size_t base,
                              std::vector<IdentRef>& out);

// A field-list entry such as "a, b int" is named when it starts with an
// identifier that is not itself the start of a type.
bool entry_is_named(const std::vector<Token>& toks, Range e) {
  if (e.size() < 2 || toks[e.first].kind != TokenKind::identifier) return false;
  const Token& second = toks[e.first + 1];
  if (is_op(second, ".")) return false;  // qualified type
  if (is_op(second, "[")) {
    // Generic instantiation "T[int]" ends with the matching bracket.
    const std::size_t close = match_close(toks, e.first + 1, e.last);
    return close + 1 != e.last;
  }
  return true;
}

std::string slice(std::string_view src, const std::vector<Token>& toks, Range r) {
  if (r.empty()) return {};
  return std::string(src.substr(toks[r.first].begin, toks[r.last - 1].end - toks[r.first].begin));
}

std::vector<Field> parse_field_list(std::string_view src, const std::vector<Token>& toks, Range r,
                                    std::size_t base) {
  std::vector<Field> fields;
  const auto entries = split_top_level(toks, r, ",");
  const bool named = std::any_of(entries.begin(), entries.end(),
                                 [&](const Range& e) { return entry_is_named(toks, e); });
  if (!named) {
    for (const auto& e : entries) {
      Field f;
      f.type_text = slice(src, toks, e);
      collect_type_identifiers(toks, e, base, f.type_identifiers);
      fields.push_back(std::move(f));
    }
    return fields;
  }
  std::vector<std::string> pending;
  for (const auto& e : entries) {
    if (e.size() == 1) {
      if (toks[e.first].kind != TokenKind::identifier) {
        throw SignatureError("expected parameter name", toks[e.first].begin);
      }
      pending.emplace_back(toks[e.first].text);
      continue;
    }
    if (!entry_is_named(toks, e)) throw SignatureError("mixed named and unnamed parameters", toks[e.first].begin);
    pending.emplace_back(toks[e.first].text);
    const Range type_range{e.first + 1, e.last};
    const std::string type_text = slice(src, toks, type_range);
    std::vector<IdentRef> ids;
    collect_type_identifiers(toks, type_range, base, ids);
    for (auto& n : pending) fields.push_back(Field{std::move(n), type_text, ids});
    pending.clear();
  }
  if (!pending.empty()) throw SignatureError("parameter name without a type", toks[r.last - 1].begin);
  return fields;
}

void collect_field_list_types(const std::vector<Token>& toks, Range r, std::size_t base,
                              std::vector<IdentRef>& out) {
  const auto entries = split_top_level(toks, r, ",");
  const bool named = std::any_of(entries.begin(), entries.end(),
                                 [&](const Range& e) { return entry_is_named(toks, e); });
  for (const auto& e : entries) {
    if (!named) {
      collect_type_identifiers(toks, e, base, out);
    } else if (e.size() > 1) {
      collect_type_identifiers(toks, {e.first + 1, e.last}, base, out);
    }
  }
}

void collect_type_identifiers(const std::vector<Token>& toks, Range r, std::size_t base,
                              std::vector<IdentRef>& out) {
  for (std::size_t i = r.first; i < r.last; ++i) {
    const Token& t = toks[i];
    if (is_kw(t, "func") && i + 1 < r.last && is_op(toks[i + 1], "(")) {
      const std::size_t close = match_close(toks, i + 1, r.last);
      collect_field_list_types(toks, {i + 2, close}, base, out);
      i = close;
      continue;
    }
    if ((is_kw(t, "struct") || is_kw(t, "interface")) && i + 1 < r.last && is_op(toks[i + 1], "{")) {
      const bool is_struct = is_kw(t, "struct");
      const std::size_t close = match_close(toks, i + 1, r.last);
      for (const auto& e : split_top_level(toks, {i + 2, close}, ";")) {
        if (e.empty()) continue;
        Range type_part = e;
        if (is_struct) {
          // Skip "a, b" field names; embedded fields are all type.
          const auto names = split_top_level(toks, e, ",");
          const Range& lastn = names.back();
          if (entry_is_named(toks, lastn)) type_part = {lastn.first + 1, lastn.last};
        } else if (toks[e.first].kind == TokenKind::identifier && e.size() > 1 && is_op(toks[e.first + 1], "(")) {
          // Method spec: the name is dropped, parameters and results are types.
          Range params{e.first + 2, match_close(toks, e.first + 1, e.last)};
          collect_field_list_types(toks, params, base, out);
          type_part = {params.last + 1, e.last};
        }
        collect_type_identifiers(toks, type_part, base, out);
      }
      i = close;
      continue;
    }
    if (t.kind != TokenKind::identifier) continue;
    if (i + 1 < r.last && is_op(toks[i + 1], ".")) continue;  // package qualifier
    out.push_back(IdentRef{std::string(t.text), base + t.begin});
  }
}

struct HeaderParse {
  Signature sig;
  std::size_t end_token;  // first token after the header
};

HeaderParse parse_header(std::string_view src, const std::vector<Token>& toks, std::size_t start) {
  const std::size_t n = toks.size();
  std::size_t i = start;
  if (i >= n || !is_kw(toks[i], "func")) {
    throw SignatureError("declaration does not begin with 'func'", i < n ? toks[i].begin : 0);
  }
  ++i;
  Signature sig;
  if (i < n && is_op(toks[i], "(")) {
    const std::size_t close = match_close(toks, i, n);
    auto recv = parse_field_list(src, toks, {i + 1, close}, 0);
    if (recv.size() != 1) throw SignatureError("receiver must have exactly one parameter", toks[i].begin);
    sig.kind = FocalKind::method;
    sig.receiver_name = recv[0].name;
    if (recv[0].type_identifiers.empty()) throw SignatureError("receiver has no type", toks[i].begin);
    // First identifier of the type: '*' and type arguments are dropped.
    sig.receiver_type = recv[0].type_identifiers.front();
    i = close + 1;
  }
  if (i >= n || toks[i].kind != TokenKind::identifier) {
    throw SignatureError("missing function name", i < n ? toks[i].begin : src.size());
  }
  sig.name = std::string(toks[i].text);
  ++i;
  if (i < n && is_op(toks[i], "[")) {
    const std::size_t close = match_close(toks, i, n);
    sig.type_params = slice(src, toks, {i, close + 1});
    for (const auto& f : parse_field_list(src, toks, {i + 1, close}, 0)) {
      if (f.name) sig.type_param_names.push_back(*f.name);
    }
    i = close + 1;
  }
  if (i >= n || !is_op(toks[i], "(")) {
    throw SignatureError("missing parameter list", i < n ? toks[i].begin : src.size());
  }
  const std::size_t pclose = match_close(toks, i, n);
  sig.params = parse_field_list(src, toks, {i + 1, pclose}, 0);
  i = pclose + 1;
  if (i < n && is_op(toks[i], "(")) {
    const std::size_t rclose = match_close(toks, i, n);
    sig.returns = parse_field_list(src, toks, {i + 1, rclose}, 0);
    i = rclose + 1;
  } else {
    // A single unparenthesized result type runs up to the body or the end.
    const std::size_t first = i;
    while (i < n && toks[i].kind != TokenKind::semicolon) {
      if (is_op(toks[i], "{")) {
        const bool type_body = i > first && (is_kw(toks[i - 1], "struct") || is_kw(toks[i - 1], "interface"));
        if (!type_body) break;
      }
      if (is_opener(toks[i])) {
        i = match_close(toks, i, n) + 1;
      } else if (is_closer(toks[i])) {
        throw SignatureError("mismatched '" + std::string(toks[i].text) + "'", toks[i].begin);
      } else {
        ++i;
      }
    }
    if (i > first) {
      Field f;
      f.type_text = slice(src, toks, {first, i});
      collect_type_identifiers(toks, {first, i}, 0, f.type_identifiers);
      sig.returns.push_back(std::move(f));
    }
  }
  return {std::move(sig), i};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string generic_path(const fs::path& p) {
  auto s = p.lexically_normal().generic_string();
  if (s.empty()) return ".";
  return s;
}

}  // namespace

Signature parse_signature(std::string_view decl_text) {
  std::vector<Token> toks;
  try {
    toks = significant_tokens(decl_text);
  } catch (const SignatureError&) {
    throw;
  } catch (const ScanError& e) {
    throw SignatureError(std::string("cannot scan declaration: ") + e.what(), e.offset());
  }
  return parse_header(decl_text, toks, 0).sig;
}

std::string signature_header(std::string_view decl_text) {
  const auto toks = significant_tokens(decl_text);
  const auto end = parse_header(decl_text, toks, 0).end_token;
  return std::string(decl_text.substr(0, toks[end - 1].end));
}

std::vector<IdentRef> seed_references(const FocalUnit& unit) {
  std::vector<IdentRef> out;
  std::set<std::string> seen;
  const auto& sig = unit.signature;
  auto add = [&](const IdentRef& r) {
    if (go::is_predeclared(r.name) || go::is_keyword(r.name)) return;
    if (std::find(sig.type_param_names.begin(), sig.type_param_names.end(), r.name) != sig.type_param_names.end()) return;
    if (!seen.insert(r.name).second) return;
    out.push_back(IdentRef{r.name, unit.byte_span.start + r.offset});
  };
  if (sig.receiver_type) add(*sig.receiver_type);
  for (const auto& p : sig.params) {
    for (const auto& r : p.type_identifiers) add(r);
  }
  for (const auto& p : sig.returns) {
    for (const auto& r : p.type_identifiers) add(r);
  }
  return out;
}

std::vector<std::string> seed_identifiers(const FocalUnit& unit) {
  std::vector<std::string> out;
  for (auto& r : seed_references(unit)) out.push_back(std::move(r.name));
  return out;
}

std::vector<Declaration> scan_declarations(std::string_view source) {
  const auto all = go::tokenize(source);
  std::vector<Declaration> decls;
  int depth = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const Token& t = all[i];
    if (t.kind == TokenKind::comment) continue;
    if (is_opener(t)) {
      ++depth;
      continue;
    }
    if (is_closer(t)) {
      --depth;
      continue;
    }
    if (depth != 0 || t.kind != TokenKind::keyword) continue;
    DeclKind kind;
    if (t.text == "func") kind = DeclKind::func;
    else if (t.text == "type") kind = DeclKind::type;
    else if (t.text == "var") kind = DeclKind::var;
    else if (t.text == "const") kind = DeclKind::constant;
    else if (t.text == "import") kind = DeclKind::import;
    else continue;

    Declaration d{kind, {t.begin, t.end}, std::nullopt, false};
    // The declaration runs to the first semicolon at its own nesting level.
    std::size_t j = i + 1;
    int inner = 0;
    std::size_t last_end = t.end;
    for (; j < all.size(); ++j) {
      const Token& u = all[j];
      if (u.kind == TokenKind::comment) continue;
      if (u.kind == TokenKind::semicolon && inner == 0) break;
      if (is_opener(u)) ++inner;
      if (is_closer(u)) {
        if (--inner < 0) throw ScanError("unbalanced '" + std::string(u.text) + "'", u.begin);
      }
      last_end = u.end;
    }
    if (inner != 0) throw ScanError("unterminated declaration", t.begin);
    d.span.end = last_end;
    d.grouped = i + 1 < all.size() && kind != DeclKind::func && is_op(all[i + 1], "(");

    // Doc comment: a contiguous run of comments, each starting its own line,
    // ending on the line right above the keyword.
    std::size_t line = go::line_of(source, t.begin);
    std::optional<std::size_t> doc_begin;
    std::size_t doc_end = 0;
    for (std::size_t k = i; k-- > 0;) {
      const Token& c = all[k];
      if (c.kind != TokenKind::comment) break;
      const std::size_t end_line = go::line_of(source, c.end);
      if (end_line + 1 != line) break;
      const std::size_t line_start = source.rfind('\n', c.begin == 0 ? 0 : c.begin - 1);
      const std::size_t from = line_start == std::string_view::npos ? 0 : line_start + 1;
      if (c.begin != 0 && text::trim(source.substr(from, c.begin - from)).size() != 0) break;
      if (!doc_begin) doc_end = c.end;
      doc_begin = c.begin;
      line = go::line_of(source, c.begin);
    }
    if (doc_begin) d.doc_span = ByteSpan{*doc_begin, doc_end};
    decls.push_back(d);
    i = j;
  }
  return decls;
}

std::string package_clause_name(std::string_view source) {
  const auto toks = significant_tokens(source);
  for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
    if (is_kw(toks[i], "package") && toks[i + 1].kind == TokenKind::identifier) return std::string(toks[i + 1].text);
  }
  return {};
}

std::vector<FocalUnit> scan_source(std::string_view source, const std::string& file_path,
                                   const std::string& package_path) {
  std::vector<FocalUnit> units;
  const std::string pkg = package_clause_name(source);
  for (const auto& d : scan_declarations(source)) {
    if (d.kind != DeclKind::func) continue;
    FocalUnit u;
    u.source_text = std::string(source.substr(d.span.start, d.span.end - d.span.start));
    try {
      u.signature = parse_signature(u.source_text);
    } catch (const SignatureError& e) {
      throw SignatureError(std::string("in ") + file_path + ": " + e.what(), d.span.start + e.offset());
    }
    if (d.doc_span) u.doc_comment = std::string(source.substr(d.doc_span->start, d.doc_span->end - d.doc_span->start));
    u.file_path = file_path;
    u.package_path = package_path;
    u.package_name = pkg;
    u.byte_span = d.span;
    units.push_back(std::move(u));
  }
  return units;
}

ScanResult scan_package(const fs::path& dir, const std::optional<fs::path>& workspace_root) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("cannot read directory " + dir.string());
  const fs::path root = workspace_root.value_or(dir);
  std::vector<fs::path> files;
  fs::directory_iterator it(dir, ec);
  if (ec) throw IoError("cannot read directory " + dir.string() + ": " + ec.message());
  for (const auto& entry : it) {
    const auto name = entry.path().filename().string();
    if (!entry.is_regular_file() || !text::ends_with(name, ".go") || text::ends_with(name, "_test.go")) continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  const std::string package_path = generic_path(fs::relative(dir, root));
  struct PerFile {
    std::vector<FocalUnit> units;
    std::optional<FileError> error;
  };
  std::vector<std::future<PerFile>> jobs;
  for (const auto& f : files) {
    jobs.push_back(std::async(std::launch::async, [f, root, package_path] {
      PerFile out;
      const std::string rel = generic_path(fs::relative(f, root));
      try {
        out.units = scan_source(read_file(f), rel, package_path);
      } catch (const Error& e) {
        out.error = FileError{rel, e.what()};
      }
      return out;
    }));
  }
  ScanResult result;
  for (auto& j : jobs) {
    auto r = j.get();
    for (auto& u : r.units) result.units.push_back(std::move(u));
    if (r.error) result.errors.push_back(std::move(*r.error));
  }
  return result;
}

const PackageInfo* GoModule::find_by_dir(std::string_view dir) const {
  for (const auto& p : packages) {
    if (p.dir == dir) return &p;
  }
  return nullptr;
}

const PackageInfo* GoModule::find_by_name(std::string_view name) const {
  for (const auto& p : packages) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

GoModule load_module(const fs::path& root, const TreeOptions& options) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw IoError("workspace not found: " + root.string());
  GoModule mod;
  mod.root = fs::absolute(root).lexically_normal();
  if (mod.root.has_filename() == false) mod.root = mod.root.parent_path();
  const auto gomod = root / "go.mod";
  if (fs::exists(gomod)) {
    std::istringstream in(read_file(gomod));
    std::string line;
    while (std::getline(in, line)) {
      const auto t = text::trim(line);
      if (text::starts_with(t, "module ")) {
        mod.module_path = text::trim(std::string_view(t).substr(7));
        if (mod.module_path.size() >= 2 && mod.module_path.front() == '"') {
          mod.module_path = mod.module_path.substr(1, mod.module_path.size() - 2);
        }
        break;
      }
    }
  }
  std::vector<fs::path> dirs{root};
  for (auto it = fs::recursive_directory_iterator(root, ec); it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) throw IoError("cannot walk " + root.string() + ": " + ec.message());
    if (!it->is_directory()) continue;
    const auto name = it->path().filename().string();
    const bool skip = name.empty() || name[0] == '.' || name[0] == '_' || name == "testdata" ||
                      (name == "vendor" && !options.include_vendor) ||
                      (it.depth() >= 0 && fs::exists(it->path() / "go.mod"));  // nested module
    if (skip) {
      it.disable_recursion_pending();
      continue;
    }
    dirs.push_back(it->path());
  }
  for (const auto& d : dirs) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(d, ec)) {
      const auto name = e.path().filename().string();
      if (e.is_regular_file() && text::ends_with(name, ".go") && !text::ends_with(name, "_test.go")) files.push_back(e.path());
    }
    if (files.empty()) continue;
    std::sort(files.begin(), files.end());
    PackageInfo info;
    info.dir = generic_path(fs::relative(d, root));
    try {
      info.name = package_clause_name(read_file(files.front()));
    } catch (const ScanError&) {
      info.name = d.filename().string();
    }
    info.import_path = info.dir == "." ? mod.module_path : mod.module_path + "/" + info.dir;
    mod.packages.push_back(std::move(info));
  }
  std::sort(mod.packages.begin(), mod.packages.end(),
            [](const PackageInfo& a, const PackageInfo& b) { return a.dir < b.dir; });
  return mod;
}

ScanResult scan_module(const GoModule& module) {
  ScanResult all;
  for (const auto& p : module.packages) {
    auto r = scan_package(module.root / p.dir, module.root);
    for (auto& u : r.units) all.units.push_back(std::move(u));
    for (auto& e : r.errors) all.errors.push_back(std::move(e));
  }
  std::stable_sort(all.units.begin(), all.units.end(), [](const FocalUnit& a, const FocalUnit& b) {
    return std::tie(a.file_path, a.byte_span.start) < std::tie(b.file_path, b.byte_span.start);
  });
  return all;
}

std::vector<FocalUnit> filter_units(const std::vector<FocalUnit>& units, const FocalFilter& filter) {
  std::optional<std::regex> re;
  if (!filter.name_pattern.empty()) re.emplace(filter.name_pattern);
  std::vector<FocalUnit> out;
  for (const auto& u : units) {
    if (filter.exported_only && !is_exported(u.name())) continue;
    if (re && !std::regex_search(u.id(), *re)) continue;
    out.push_back(u);
  }
  return out;
}

}  // namespace ratg
