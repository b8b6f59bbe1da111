#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ratg/focal.hpp"
#include "ratg/lsp/connection.hpp"
#include "ratg/lsp/protocol.hpp"

namespace ratg {

using lsp::SourcePosition;

struct ServerOptions {
  std::string executable = "gopls";
  std::vector<std::string> args;
  std::chrono::milliseconds startup_timeout{60000};
  std::chrono::milliseconds request_timeout{10000};
  std::map<std::string, std::string> extra_env;
};

struct Location {
  std::filesystem::path path;
  SourcePosition start;
  SourcePosition end;
};

/// A running language server bound to one workspace. Requests are strictly
/// sequential; the handle is not thread-safe.
class ServerHandle {
 public:
  /// Launches the server and completes the initialize handshake. Throws
  /// lsp::LspError (workspace_not_found, spawn_failed, handshake_timeout,
  /// malformed_response).
  static ServerHandle start(const std::filesystem::path& workspace_root, const ServerOptions& options = {});

  ServerHandle(ServerHandle&&) noexcept = default;
  ServerHandle& operator=(ServerHandle&&) noexcept = default;
  ~ServerHandle();

  pid_t pid() const noexcept { return connection_->process().pid(); }
  const std::filesystem::path& workspace_root() const noexcept { return workspace_root_; }
  int next_request_id() const noexcept { return connection_->next_request_id(); }
  const std::vector<int>& issued_request_ids() const noexcept { return connection_->issued_ids(); }
  const lsp::json& capabilities() const noexcept { return capabilities_; }
  const lsp::json& server_info() const noexcept { return server_info_; }
  std::chrono::milliseconds request_timeout() const noexcept { return options_.request_timeout; }

  /// Opens the document on first use (version 1), afterwards sends the full
  /// text as a change and bumps the version. Returns the new version.
  int sync_document(const std::filesystem::path& path, const std::string& text);
  void close_document(const std::filesystem::path& path);
  std::optional<int> document_version(const std::filesystem::path& path) const;
  /// Current text of an open document.
  const std::string* document_text(const std::filesystem::path& path) const;

  std::vector<Location> definition(const std::filesystem::path& path, SourcePosition position);
  /// Hover contents flattened to text, or nullopt when the server has none.
  std::optional<std::string> hover(const std::filesystem::path& path, SourcePosition position);

  /// shutdown + exit; kills the process if it does not exit promptly.
  void shutdown();

 private:
  ServerHandle() = default;

  struct Document {
    int version = 0;
    std::string text;
  };

  std::unique_ptr<lsp::Connection> connection_;
  std::filesystem::path workspace_root_;
  ServerOptions options_;
  lsp::json capabilities_;
  lsp::json server_info_;
  std::map<std::filesystem::path, Document> documents_;
  bool shut_down_ = false;
};

/// One fetched definition.
struct ContextEntry {
  std::string identifier;
  std::string definition_text;
  std::optional<std::string> doc_comment;
  std::string path;  // workspace-relative when inside the workspace
  SourcePosition position;
  int fetch_round = 0;
  bool operator==(const ContextEntry&) const = default;
};

struct FetchOptions {
  /// Accept definitions outside the workspace (standard library, module cache).
  bool include_external = false;
  /// Definitions inside these files are treated as not found.
  std::vector<std::filesystem::path> excluded_files;
};

/// The declaration enclosing a byte offset of a Go source file.
struct DeclarationBlock {
  std::string text;
  std::optional<std::string> doc_comment;
  ByteSpan span;
};

/// Finds the top-level declaration containing `offset`. For type
/// declarations, the method headers declared on that type in the same
/// package directory are appended. Returns nullopt if `offset` lies outside
/// every declaration.
std::optional<DeclarationBlock> extract_declaration_block(const std::filesystem::path& file,
                                                          std::string_view source, std::size_t offset);

/// Looks up the definition of the identifier ending at `position` in
/// `document`. Returns nullopt when the server reports no definition or the
/// definition is out of scope. Throws lsp::LspError on timeout or server
/// failure.
std::optional<ContextEntry> fetch_identifier_context(ServerHandle& server, const std::string& identifier,
                                                     const std::filesystem::path& document,
                                                     SourcePosition position, int fetch_round,
                                                     const FetchOptions& options = {});

/// Hover markdown reduced to its prose: fenced code blocks are dropped.
std::string hover_prose(std::string_view hover);

}  // namespace ratg
