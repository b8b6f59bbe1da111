#include "ratg/fetcher.hpp"

#include <unistd.h>

#include <fstream>
#include <sstream>

#include "ratg/text.hpp"

namespace ratg {

namespace fs = std::filesystem;
using lsp::json;
using lsp::LspError;
using lsp::LspErrorKind;

namespace {

fs::path normalize(const fs::path& p) {
  std::error_code ec;
  auto out = fs::weakly_canonical(fs::absolute(p), ec);
  return ec ? fs::absolute(p).lexically_normal() : out;
}

std::optional<std::string> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SourcePosition parse_position(const json& j) {
  if (!j.is_object() || !j.contains("line") || !j.contains("character")) {
    throw LspError(LspErrorKind::malformed_response, "bad position: " + j.dump());
  }
  return {j["line"].get<std::uint32_t>(), j["character"].get<std::uint32_t>()};
}

std::optional<Location> parse_location(const json& j) {
  if (!j.is_object()) throw LspError(LspErrorKind::malformed_response, "bad location: " + j.dump());
  const bool link = j.contains("targetUri");
  const auto& uri = link ? j["targetUri"] : j.value("uri", json());
  const auto& range = link ? j.value("targetSelectionRange", json()) : j.value("range", json());
  if (!uri.is_string() || !range.is_object()) {
    throw LspError(LspErrorKind::malformed_response, "bad location: " + j.dump());
  }
  auto path = lsp::uri_to_path(uri.get<std::string>());
  if (!path) return std::nullopt;
  return Location{*path, parse_position(range["start"]), parse_position(range["end"])};
}

void flatten_hover(const json& contents, std::string& out) {
  auto append = [&](const std::string& s) {
    if (s.empty()) return;
    if (!out.empty()) out += "\n\n";
    out += s;
  };
  if (contents.is_string()) {
    append(contents.get<std::string>());
  } else if (contents.is_array()) {
    for (const auto& c : contents) flatten_hover(c, out);
  } else if (contents.is_object() && contents.contains("value")) {
    const std::string value = contents["value"].get<std::string>();
    if (contents.contains("language")) {
      append("```" + contents["language"].get<std::string>() + "\n" + value + "\n```");
    } else {
      append(value);
    }
  }
}

std::string word_at(std::string_view source, std::size_t offset) {
  std::size_t begin = offset;
  while (begin > 0) {
    std::size_t prev = begin - 1;
    while (prev > 0 && !text::is_utf8_boundary(source, prev)) --prev;
    const auto d = text::decode_utf8(source, prev);
    if (!d || !text::is_identifier_char(d->code_point)) break;
    begin = prev;
  }
  std::size_t end = offset;
  while (end < source.size()) {
    const auto d = text::decode_utf8(source, end);
    if (!d || !text::is_identifier_char(d->code_point)) break;
    end += d->length;
  }
  return std::string(source.substr(begin, end - begin));
}

std::string as_line_comments(const std::string& prose) {
  std::string out;
  std::istringstream in(prose);
  for (std::string line; std::getline(in, line);) {
    if (!out.empty()) out += '\n';
    out += line.empty() ? "//" : "// " + line;
  }
  return out;
}

}  // namespace

ServerHandle ServerHandle::start(const fs::path& workspace_root, const ServerOptions& options) {
  std::error_code ec;
  if (!fs::is_directory(workspace_root, ec)) {
    throw LspError(LspErrorKind::workspace_not_found, workspace_root.string());
  }
  const auto exe = find_executable(options.executable);
  if (!exe) throw LspError(LspErrorKind::spawn_failed, "executable not found: " + options.executable);

  ServerHandle h;
  h.workspace_root_ = normalize(workspace_root);
  h.options_ = options;
  try {
    Subprocess::Options popts;
    popts.working_dir = h.workspace_root_;
    popts.extra_env = options.extra_env;
    h.connection_ = std::make_unique<lsp::Connection>(Subprocess::spawn(exe->string(), options.args, popts));
  } catch (const SpawnError& e) {
    throw LspError(LspErrorKind::spawn_failed, e.what());
  }

  const std::string root_uri = lsp::path_to_uri(h.workspace_root_);
  const json params = {
      {"processId", static_cast<int>(::getpid())},
      {"clientInfo", {{"name", "ratg"}}},
      {"rootUri", root_uri},
      {"rootPath", h.workspace_root_.string()},
      {"workspaceFolders", json::array({{{"uri", root_uri}, {"name", h.workspace_root_.filename().string()}}})},
      {"capabilities",
       {{"textDocument",
         {{"synchronization", {{"dynamicRegistration", false}}},
          {"definition", {{"linkSupport", false}}},
          {"hover", {{"contentFormat", json::array({"markdown", "plaintext"})}}}}},
        {"workspace", {{"configuration", true}, {"workspaceFolders", true}}}}},
  };
  json result;
  try {
    result = h.connection_->request("initialize", params, options.startup_timeout);
    if (!result.is_object() || !result.contains("capabilities") || !result["capabilities"].is_object()) {
      throw LspError(LspErrorKind::malformed_response, "initialize result lacks capabilities");
    }
  } catch (const LspError& e) {
    h.shut_down_ = true;
    h.connection_->process().kill();
    if (e.kind() == LspErrorKind::request_timeout) {
      throw LspError(LspErrorKind::handshake_timeout, "no initialize response within " +
                                                           std::to_string(options.startup_timeout.count()) + " ms");
    }
    throw;
  }
  h.capabilities_ = result["capabilities"];
  h.server_info_ = result.value("serverInfo", json::object());
  h.connection_->notify("initialized", json::object());
  return h;
}

ServerHandle::~ServerHandle() {
  if (!connection_ || shut_down_) return;
  try {
    shutdown();
  } catch (...) {
  }
}

int ServerHandle::sync_document(const fs::path& path, const std::string& text) {
  const auto key = normalize(path);
  auto& doc = documents_[key];
  const std::string uri = lsp::path_to_uri(key);
  if (doc.version == 0) {
    doc.version = 1;
    connection_->notify("textDocument/didOpen",
                        {{"textDocument", {{"uri", uri}, {"languageId", "go"}, {"version", 1}, {"text", text}}}});
  } else {
    ++doc.version;
    connection_->notify("textDocument/didChange",
                        {{"textDocument", {{"uri", uri}, {"version", doc.version}}},
                         {"contentChanges", json::array({{{"text", text}}})}});
  }
  doc.text = text;
  return doc.version;
}

void ServerHandle::close_document(const fs::path& path) {
  const auto key = normalize(path);
  if (documents_.erase(key) == 0) return;
  connection_->notify("textDocument/didClose", {{"textDocument", {{"uri", lsp::path_to_uri(key)}}}});
}

std::optional<int> ServerHandle::document_version(const fs::path& path) const {
  const auto it = documents_.find(normalize(path));
  if (it == documents_.end()) return std::nullopt;
  return it->second.version;
}

const std::string* ServerHandle::document_text(const fs::path& path) const {
  const auto it = documents_.find(normalize(path));
  return it == documents_.end() ? nullptr : &it->second.text;
}

std::vector<Location> ServerHandle::definition(const fs::path& path, SourcePosition position) {
  const json params = {{"textDocument", {{"uri", lsp::path_to_uri(normalize(path))}}},
                       {"position", {{"line", position.line}, {"character", position.character}}}};
  const json result = connection_->request("textDocument/definition", params, options_.request_timeout);
  std::vector<Location> out;
  if (result.is_null()) return out;
  if (result.is_array()) {
    for (const auto& j : result) {
      if (auto loc = parse_location(j)) out.push_back(std::move(*loc));
    }
  } else if (auto loc = parse_location(result)) {
    out.push_back(std::move(*loc));
  }
  return out;
}

std::optional<std::string> ServerHandle::hover(const fs::path& path, SourcePosition position) {
  const json params = {{"textDocument", {{"uri", lsp::path_to_uri(normalize(path))}}},
                       {"position", {{"line", position.line}, {"character", position.character}}}};
  const json result = connection_->request("textDocument/hover", params, options_.request_timeout);
  if (result.is_null()) return std::nullopt;
  if (!result.is_object() || !result.contains("contents")) {
    throw LspError(LspErrorKind::malformed_response, "hover result lacks contents");
  }
  std::string out;
  flatten_hover(result["contents"], out);
  if (out.empty()) return std::nullopt;
  return out;
}

void ServerHandle::shutdown() {
  if (!connection_ || shut_down_) return;
  shut_down_ = true;
  try {
    connection_->request("shutdown", nullptr, std::chrono::milliseconds(2000));
    connection_->notify("exit", nullptr);
  } catch (const LspError&) {
  }
  auto& proc = connection_->process();
  proc.close_stdin();
  if (!proc.wait_for(std::chrono::milliseconds(2000))) proc.kill();
}

std::string hover_prose(std::string_view hover) {
  std::string out;
  bool in_fence = false;
  std::istringstream in{std::string(hover)};
  for (std::string line; std::getline(in, line);) {
    if (text::starts_with(text::trim(line), "```")) {
      in_fence = !in_fence;
      continue;
    }
    if (in_fence) continue;
    out += line;
    out += '\n';
  }
  return text::trim(out);
}

std::optional<DeclarationBlock> extract_declaration_block(const fs::path& file, std::string_view source,
                                                          std::size_t offset) {
  if (offset >= source.size()) return std::nullopt;
  const auto decls = scan_declarations(source);
  const Declaration* found = nullptr;
  for (const auto& d : decls) {
    if (d.span.start <= offset && offset < d.span.end) {
      found = &d;
      break;
    }
  }
  if (!found || found->kind == DeclKind::import) return std::nullopt;

  DeclarationBlock block;
  block.span = found->span;
  block.text = std::string(source.substr(found->span.start, found->span.end - found->span.start));
  if (found->doc_span) {
    block.doc_comment = std::string(source.substr(found->doc_span->start, found->doc_span->end - found->doc_span->start));
  }
  if (found->kind == DeclKind::type) {
    const std::string type_name = word_at(source, offset);
    std::error_code ec;
    const auto dir = file.parent_path().empty() ? fs::path(".") : file.parent_path();
    if (!type_name.empty() && fs::is_directory(dir, ec)) {
      for (const auto& unit : scan_package(dir).units) {
        if (!unit.signature.receiver_type || unit.signature.receiver_type->name != type_name) continue;
        block.text += "\n\n";
        if (unit.doc_comment) block.text += *unit.doc_comment + "\n";
        block.text += signature_header(unit.source_text);
      }
    }
  }
  return block;
}

std::optional<ContextEntry> fetch_identifier_context(ServerHandle& server, const std::string& identifier,
                                                     const fs::path& document, SourcePosition position,
                                                     int fetch_round, const FetchOptions& options) {
  const auto locations = server.definition(document, position);
  if (locations.empty()) return std::nullopt;
  const Location& loc = locations.front();
  const auto target = normalize(loc.path);
  for (const auto& excluded : options.excluded_files) {
    if (normalize(excluded) == target) return std::nullopt;
  }
  const auto rel = target.lexically_relative(server.workspace_root());
  const bool inside = !rel.empty() && *rel.begin() != "..";
  if (!inside && !options.include_external) return std::nullopt;

  std::string source;
  if (const auto* open = server.document_text(target)) {
    source = *open;
  } else if (auto contents = read_file(target)) {
    source = std::move(*contents);
  } else {
    return std::nullopt;
  }
  std::size_t offset = 0;
  try {
    offset = lsp::byte_offset(source, loc.start);
  } catch (const ArgumentError&) {
    return std::nullopt;
  }
  auto block = extract_declaration_block(target, source, offset);
  if (!block || text::trim(block->text).empty()) return std::nullopt;

  ContextEntry entry;
  entry.identifier = identifier;
  entry.definition_text = std::move(block->text);
  entry.doc_comment = std::move(block->doc_comment);
  entry.path = inside ? rel.generic_string() : target.generic_string();
  entry.position = loc.start;
  entry.fetch_round = fetch_round;
  if (!entry.doc_comment) {
    if (auto hover = server.hover(document, position)) {
      const auto prose = hover_prose(*hover);
      if (!prose.empty()) entry.doc_comment = as_line_comments(prose);
    }
  }
  return entry;
}

}  // namespace ratg
