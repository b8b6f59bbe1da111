#include "ratg/generation.hpp"

#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "ratg/process.hpp"
#include "ratg/text.hpp"

namespace ratg {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::token_cap: return "token_cap";
    case StopReason::brace_close: return "brace_close";
    case StopReason::generator_end: return "generator_end";
  }
  return "unknown";
}

std::string_view to_string(FetchOutcome o) {
  switch (o) {
    case FetchOutcome::hit: return "hit";
    case FetchOutcome::miss: return "miss";
    case FetchOutcome::error: return "error";
  }
  return "unknown";
}

namespace {

StopReason stop_reason_from_string(std::string_view s) {
  if (s == "token_cap") return StopReason::token_cap;
  if (s == "brace_close") return StopReason::brace_close;
  if (s == "generator_end") return StopReason::generator_end;
  throw ArgumentError("unknown stop reason " + std::string(s));
}

FetchOutcome fetch_outcome_from_string(std::string_view s) {
  if (s == "hit") return FetchOutcome::hit;
  if (s == "miss") return FetchOutcome::miss;
  if (s == "error") return FetchOutcome::error;
  throw ArgumentError("unknown fetch outcome " + std::string(s));
}

// True if the bytes from `offset` are a valid but truncated UTF-8 prefix.
bool truncated_utf8(std::string_view s, std::size_t offset) {
  const auto lead = static_cast<unsigned char>(s[offset]);
  std::size_t need = lead >= 0xF0 && lead < 0xF8 ? 4 : lead >= 0xE0 ? 3 : lead >= 0xC0 ? 2 : 0;
  if (need == 0 || offset + need <= s.size()) return false;
  for (std::size_t i = offset + 1; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) return false;
  }
  return true;
}

std::size_t last_char_start(std::string_view s, std::size_t begin, std::size_t end) {
  std::size_t i = end - 1;
  while (i > begin && !text::is_utf8_boundary(s, i)) --i;
  return i;
}

void flush(GenerationState& s, char32_t terminator, const StepHooks& hooks) {
  if (s.identifier_buffer.empty()) return;
  FlushedIdentifier f{s.identifier_buffer, s.buffer_offset, s.token_length, terminator == U'.'};
  s.identifier_buffer.clear();
  s.flushed.push_back(f);
  if (hooks.on_flush) hooks.on_flush(f, s);
  if (hooks.is_known && hooks.is_known(f.name)) return;
  if (hooks.fetch) s.fetch_log.push_back(hooks.fetch(f, s));
}

void scan_char(GenerationState& s, char32_t c, std::size_t at, std::string_view bytes, const StepHooks& hooks) {
  switch (s.mode) {
    case LexMode::number: {
      const bool exponent_sign = (c == U'+' || c == U'-') &&
                                 (s.hex_number ? (s.previous == U'p' || s.previous == U'P')
                                               : (s.previous == U'e' || s.previous == U'E'));
      if (text::is_identifier_char(c) || c == U'.' || exponent_sign) {
        if (s.number_length == 1 && s.previous == U'0' && (c == U'x' || c == U'X')) s.hex_number = true;
        s.previous = c;
        ++s.number_length;
        return;
      }
      s.mode = LexMode::code;
      break;
    }
    case LexMode::string:
    case LexMode::rune:
      if (s.escape) {
        s.escape = false;
      } else if (c == U'\\') {
        s.escape = true;
      } else if (c == U'\n' || c == (s.mode == LexMode::string ? U'"' : U'\'')) {
        s.mode = LexMode::code;
      }
      return;
    case LexMode::raw_string:
      if (c == U'`') s.mode = LexMode::code;
      return;
    case LexMode::line_comment:
      if (c == U'\n') s.mode = LexMode::code;
      return;
    case LexMode::block_comment:
      if (s.star && c == U'/') s.mode = LexMode::code;
      s.star = c == U'*';
      return;
    case LexMode::code:
      break;
  }

  if (s.slash) {
    s.slash = false;
    if (c == U'/') {
      s.mode = LexMode::line_comment;
      return;
    }
    if (c == U'*') {
      s.mode = LexMode::block_comment;
      s.star = false;
      return;
    }
  }
  if (text::is_identifier_char(c)) {
    if (s.identifier_buffer.empty()) {
      if (text::is_go_digit(c)) {
        s.mode = LexMode::number;
        s.hex_number = false;
        s.number_length = 1;
        s.previous = c;
        return;
      }
      s.buffer_offset = at;
    }
    s.identifier_buffer.append(bytes);
    return;
  }
  flush(s, c, hooks);
  switch (c) {
    case U'"': s.mode = LexMode::string; s.escape = false; break;
    case U'\'': s.mode = LexMode::rune; s.escape = false; break;
    case U'`': s.mode = LexMode::raw_string; break;
    case U'/': s.slash = true; break;
    case U'{': ++s.brace_depth; break;
    case U'}':
      if (--s.brace_depth == 0) s.close_offset = at + bytes.size();
      break;
    default: break;
  }
}

}  // namespace

std::vector<Fragment> classify_chars(std::string_view token, bool buffer_empty) {
  std::vector<Fragment> out;
  for (std::size_t i = 0; i < token.size();) {
    const auto d = text::decode_utf8(token, i);
    const std::size_t len = d ? d->length : 1;
    bool ident = d && text::is_identifier_char(d->code_point);
    if (ident && buffer_empty && text::is_go_digit(d->code_point)) ident = false;
    buffer_empty = !ident;
    if (out.empty() || out.back().identifier != ident) out.push_back(Fragment{"", ident});
    out.back().text.append(token.substr(i, len));
    i += len;
  }
  return out;
}

GenerationState initial_state(std::string_view focal_name) {
  GenerationState s;
  s.test_snippet = initial_snippet(focal_name);
  s.initial_length = s.test_snippet.size();
  s.scan_offset = s.test_snippet.size();
  s.brace_depth = 1;
  return s;
}

void step(GenerationState& s, std::string_view token, const StepHooks& hooks) {
  s.test_snippet.append(token);
  ++s.token_length;
  while (!s.close_offset && s.scan_offset < s.test_snippet.size()) {
    const std::string_view t = s.test_snippet;
    const auto d = text::decode_utf8(t, s.scan_offset);
    if (!d && truncated_utf8(t, s.scan_offset)) break;
    const std::size_t at = s.scan_offset;
    const std::size_t len = d ? d->length : 1;
    s.scan_offset += len;
    scan_char(s, d ? d->code_point : U'�', at, t.substr(at, len), hooks);
  }
}

int LanguageServerFetcher::sync(const fs::path& path, const std::string& text) {
  auto& excluded = options_.excluded_files;
  if (std::find(excluded.begin(), excluded.end(), path) == excluded.end()) excluded.push_back(path);
  return server_.sync_document(path, text);
}

void LanguageServerFetcher::close(const fs::path& path) { server_.close_document(path); }

std::optional<ContextEntry> LanguageServerFetcher::fetch(const std::string& identifier, const fs::path& path,
                                                         SourcePosition position, int fetch_round) {
  return fetch_identifier_context(server_, identifier, path, position, fetch_round, options_);
}

std::string test_file_text(std::string_view package_name, const std::vector<std::string>& imports,
                           std::string_view body) {
  std::string out = "package " + std::string(package_name) + "\n\n";
  if (imports.empty()) {
    out += "import \"testing\"\n\n";
  } else {
    out += "import (\n\t\"testing\"\n\n";
    for (const auto& imp : imports) out += "\t\"" + imp + "\"\n";
    out += ")\n\n";
  }
  out += body;
  if (!body.empty() && body.back() != '\n') out += '\n';
  return out;
}

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw IoError("cannot write " + p.string());
}

// Closes and deletes the scratch file however generation ends.
class Scratch {
 public:
  Scratch(ContextFetcher* fetcher, fs::path path) : fetcher_(fetcher), path_(std::move(path)) {}
  ~Scratch() {
    if (!used_) return;
    try {
      fetcher_->close(path_);
    } catch (...) {
    }
    std::error_code ec;
    fs::remove(path_, ec);
  }
  Scratch(const Scratch&) = delete;
  Scratch& operator=(const Scratch&) = delete;

  void sync(const std::string& text) {
    used_ = true;
    write_text(path_, text);
    fetcher_->sync(path_, text);
  }
  const fs::path& path() const { return path_; }

 private:
  ContextFetcher* fetcher_;
  fs::path path_;
  bool used_ = false;
};

FetchRecord fetch_into(ContextFetcher& fetcher, ContextStore& store, const std::string& name, const fs::path& path,
                       SourcePosition pos, int round) {
  FetchRecord rec{name, FetchOutcome::miss, round, ""};
  try {
    if (auto entry = fetcher.fetch(name, path, pos, round)) {
      store.insert(std::move(*entry));
      rec.outcome = FetchOutcome::hit;
      return rec;
    }
  } catch (const Error& e) {
    rec.outcome = FetchOutcome::error;
    rec.detail = e.what();
  }
  store.record_miss(name);
  return rec;
}

}  // namespace

TestCandidate generate(const FocalUnit& focal, TokenGenerator& generator, ContextFetcher* fetcher,
                       ContextStore& store, const GoModule& module, const GenerationConfig& config) {
  if (config.max_tokens < 1) throw ConfigError("max_tokens", "must be at least 1");
  if (config.fetch_enabled && !fetcher) throw ArgumentError("fetching is enabled but no fetcher was given");

  GenerationState state = initial_state(focal.name());
  std::vector<std::string> imports;
  Scratch scratch(fetcher, module.root / focal.package_path / config.scratch_file_name);
  std::string scratch_text;

  if (config.fetch_enabled) {
    const fs::path focal_file = module.root / focal.file_path;
    const std::string source = read_text(focal_file);
    for (const auto& ref : seed_references(focal)) {
      if (store.contains(ref.name)) continue;
      const auto pos = lsp::utf16_position(source, last_char_start(source, ref.offset, ref.offset + ref.name.size()));
      state.fetch_log.push_back(fetch_into(*fetcher, store, ref.name, focal_file, pos, 0));
    }
  }

  StepHooks hooks;
  hooks.is_known = [&](std::string_view name) { return store.contains(name); };
  hooks.on_flush = [&](const FlushedIdentifier& f, GenerationState& s) {
    if (f.selector_base && f.name != focal.package_name) {
      if (const auto* pkg = module.find_by_name(f.name);
          pkg && std::find(imports.begin(), imports.end(), pkg->import_path) == imports.end()) {
        imports.push_back(pkg->import_path);
      }
    }
    if (!config.fetch_enabled) return;
    scratch_text = test_file_text(focal.package_name, imports, "") + s.test_snippet;
    scratch.sync(scratch_text);
  };
  if (config.fetch_enabled) {
    hooks.fetch = [&](const FlushedIdentifier& f, GenerationState&) {
      const std::size_t base = scratch_text.size() - state.test_snippet.size();
      const std::size_t last = last_char_start(state.test_snippet, f.offset, f.offset + f.name.size());
      const auto pos = lsp::utf16_position(scratch_text, base + last);
      return fetch_into(*fetcher, store, f.name, scratch.path(), pos, f.token_index);
    };
  }

  if (config.fetch_enabled) {
    scratch_text = test_file_text(focal.package_name, imports, "") + state.test_snippet;
    scratch.sync(scratch_text);
  }

  std::optional<StopReason> stop;
  std::string context = store.render();
  std::size_t context_revision = store.revision();
  std::string prompt;
  int calls = 0;
  while (state.token_length < config.max_tokens) {
    if (store.revision() != context_revision) {
      context = store.render();
      context_revision = store.revision();
    }
    prompt = build_prompt({config.task_description, context, focal.source_text, focal.kind(), state.test_snippet});
    if (config.trace) config.trace(calls, prompt);
    ++calls;
    auto token = generator.next_token(prompt);
    if (!token) {
      stop = StopReason::generator_end;
      break;
    }
    if (token->empty()) throw GeneratorError("generator returned an empty token");
    step(state, *token, hooks);
    if (state.close_offset) {
      stop = StopReason::brace_close;
      break;
    }
  }
  if (!stop || state.token_length >= config.max_tokens) stop = StopReason::token_cap;

  TestCandidate c;
  c.focal_id = focal.id();
  c.package_name = focal.package_name;
  c.package_path = focal.package_path;
  c.source_text = state.close_offset ? state.test_snippet.substr(0, *state.close_offset) : state.test_snippet;
  c.stop_reason = *stop;
  c.fetch_log = std::move(state.fetch_log);
  c.token_count = state.token_length;
  c.imports = std::move(imports);
  c.final_prompt =
      build_prompt({config.task_description, store.render(), focal.source_text, focal.kind(), state.test_snippet});
  return c;
}

std::string assemble_test_file(const TestCandidate& candidate, std::string_view package_name,
                               const AssembleOptions& options) {
  std::string text = test_file_text(package_name, candidate.imports, candidate.source_text);
  if (!options.import_fixer) return text;
  const fs::path dir = options.working_dir.empty() ? fs::temp_directory_path() : options.working_dir;
  const fs::path tmp = dir / ("ratg_fix_" + std::to_string(::getpid()) + "_test.go");
  write_text(tmp, text);
  CommandResult r;
  try {
    r = run_command(*options.import_fixer, {tmp.string()}, dir, std::chrono::seconds(60), {}, false);
  } catch (...) {
    fs::remove(tmp);
    throw;
  }
  fs::remove(tmp);
  if (r.timed_out || r.exit_code != 0) {
    throw Error("import fixer " + *options.import_fixer + " failed with exit code " + std::to_string(r.exit_code));
  }
  return r.output;
}

json to_json(const TestCandidate& c) {
  json log = json::array();
  for (const auto& r : c.fetch_log) {
    json e = {{"identifier", r.identifier}, {"outcome", to_string(r.outcome)}, {"token_index", r.token_index}};
    if (!r.detail.empty()) e["detail"] = r.detail;
    log.push_back(e);
  }
  return {{"focal_id", c.focal_id},       {"package_name", c.package_name}, {"package_path", c.package_path},
          {"source_text", c.source_text}, {"stop_reason", to_string(c.stop_reason)},
          {"fetch_log", log},             {"token_count", c.token_count},   {"imports", c.imports}};
}

TestCandidate candidate_from_json(const json& j) {
  TestCandidate c;
  c.focal_id = j.at("focal_id").get<std::string>();
  c.package_name = j.at("package_name").get<std::string>();
  c.package_path = j.at("package_path").get<std::string>();
  c.source_text = j.at("source_text").get<std::string>();
  c.stop_reason = stop_reason_from_string(j.at("stop_reason").get<std::string>());
  for (const auto& e : j.at("fetch_log")) {
    c.fetch_log.push_back(FetchRecord{e.at("identifier").get<std::string>(),
                                      fetch_outcome_from_string(e.at("outcome").get<std::string>()),
                                      e.at("token_index").get<int>(), e.value("detail", "")});
  }
  c.token_count = j.at("token_count").get<int>();
  c.imports = j.at("imports").get<std::vector<std::string>>();
  return c;
}

}  // namespace ratg
