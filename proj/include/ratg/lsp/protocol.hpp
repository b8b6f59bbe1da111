#pragma once

#include <cstdint>
#include <filesystem>
#include "json.hpp"
#include <optional>
#include <string>
#include <string_view>

#include "ratg/error.hpp"

namespace ratg::lsp {

using json = nlohmann::json;

enum class LspErrorKind {
  workspace_not_found,
  spawn_failed,
  handshake_timeout,
  malformed_response,
  request_timeout,
  server_error,
  server_exited,
};

std::string_view to_string(LspErrorKind kind);

class LspError : public Error {
 public:
  LspError(LspErrorKind kind, const std::string& what)
      : Error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  LspErrorKind kind() const noexcept { return kind_; }

 private:
  LspErrorKind kind_;
};

/// `Content-Length: <n>\r\n\r\n<body>` around the serialized message.
std::string frame(const json& message);

/// Incremental decoder for a Content-Length framed byte stream.
class MessageReader {
 public:
  void feed(std::string_view bytes) { buffer_.append(bytes); }
  /// Next complete message, or nullopt if more bytes are needed. Throws
  /// LspError(malformed_response) on bad headers or a body that is not JSON.
  std::optional<json> next();
  std::size_t buffered() const noexcept { return buffer_.size(); }

 private:
  std::string buffer_;
};

/// Zero-based line and UTF-16 code-unit column.
struct SourcePosition {
  std::uint32_t line = 0;
  std::uint32_t character = 0;
  bool operator==(const SourcePosition&) const = default;
  auto operator<=>(const SourcePosition&) const = default;
};

/// Throws ArgumentError if `byte_offset` is past the end or inside a UTF-8
/// sequence.
SourcePosition utf16_position(std::string_view text, std::size_t byte_offset);

/// Inverse of utf16_position. Throws ArgumentError for a line past the end or
/// a column past the end of its line.
std::size_t byte_offset(std::string_view text, SourcePosition position);

std::string path_to_uri(const std::filesystem::path& path);
/// Returns nullopt for non-file URIs.
std::optional<std::filesystem::path> uri_to_path(std::string_view uri);

}  // namespace ratg::lsp
