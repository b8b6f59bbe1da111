#include "ratg/lsp/protocol.hpp"

#include <cctype>
#include <charconv>

#include "ratg/text.hpp"

namespace ratg::lsp {

std::string_view to_string(LspErrorKind kind) {
  switch (kind) {
    case LspErrorKind::workspace_not_found: return "workspace not found";
    case LspErrorKind::spawn_failed: return "spawn failed";
    case LspErrorKind::handshake_timeout: return "handshake timeout";
    case LspErrorKind::malformed_response: return "malformed response";
    case LspErrorKind::request_timeout: return "request timeout";
    case LspErrorKind::server_error: return "server error";
    case LspErrorKind::server_exited: return "server exited";
  }
  return "unknown";
}

std::string frame(const json& message) {
  const std::string body = message.dump();
  return "Content-Length: " + std::to_string(body.size()) + "\r\n\r\n" + body;
}

std::optional<json> MessageReader::next() {
  const auto header_end = buffer_.find("\r\n\r\n");
  if (header_end == std::string::npos) {
    if (buffer_.size() > 8192) throw LspError(LspErrorKind::malformed_response, "header block too long");
    return std::nullopt;
  }
  std::optional<std::size_t> length;
  std::size_t pos = 0;
  while (pos < header_end) {
    auto eol = buffer_.find("\r\n", pos);
    if (eol == std::string::npos || eol > header_end) eol = header_end;
    const std::string_view line(buffer_.data() + pos, eol - pos);
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw LspError(LspErrorKind::malformed_response, "bad header line: " + std::string(line));
    }
    std::string key(line.substr(0, colon));
    for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (text::trim(key) == "content-length") {
      const auto value = text::trim(line.substr(colon + 1));
      std::size_t n = 0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
      if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw LspError(LspErrorKind::malformed_response, "bad Content-Length: " + value);
      }
      length = n;
    }
    pos = eol + 2;
  }
  if (!length) throw LspError(LspErrorKind::malformed_response, "missing Content-Length");
  const std::size_t body_start = header_end + 4;
  if (buffer_.size() < body_start + *length) return std::nullopt;
  json message;
  try {
    message = json::parse(buffer_.begin() + static_cast<std::ptrdiff_t>(body_start),
                          buffer_.begin() + static_cast<std::ptrdiff_t>(body_start + *length));
  } catch (const json::parse_error& e) {
    throw LspError(LspErrorKind::malformed_response, std::string("body is not JSON: ") + e.what());
  }
  buffer_.erase(0, body_start + *length);
  if (!message.is_object()) throw LspError(LspErrorKind::malformed_response, "message is not an object");
  return message;
}

SourcePosition utf16_position(std::string_view text, std::size_t byte_offset) {
  if (byte_offset > text.size()) {
    throw ArgumentError("offset " + std::to_string(byte_offset) + " out of range");
  }
  if (!text::is_utf8_boundary(text, byte_offset)) {
    throw ArgumentError("offset " + std::to_string(byte_offset) + " is inside a UTF-8 sequence");
  }
  SourcePosition pos;
  std::size_t line_start = 0;
  for (std::size_t i = 0; i < byte_offset; ++i) {
    if (text[i] == '\n') {
      ++pos.line;
      line_start = i + 1;
    }
  }
  for (std::size_t i = line_start; i < byte_offset;) {
    const auto d = text::decode_utf8(text, i);
    if (!d) throw ArgumentError("invalid UTF-8 before offset " + std::to_string(byte_offset));
    pos.character += d->code_point >= 0x10000 ? 2 : 1;
    i += d->length;
  }
  return pos;
}

std::size_t byte_offset(std::string_view text, SourcePosition position) {
  std::size_t i = 0;
  for (std::uint32_t line = 0; line < position.line; ++line) {
    const auto nl = text.find('\n', i);
    if (nl == std::string_view::npos) throw ArgumentError("line " + std::to_string(position.line) + " out of range");
    i = nl + 1;
  }
  std::uint32_t units = 0;
  while (units < position.character) {
    if (i >= text.size() || text[i] == '\n') {
      throw ArgumentError("character " + std::to_string(position.character) + " past end of line");
    }
    const auto d = text::decode_utf8(text, i);
    if (!d) throw ArgumentError("invalid UTF-8 in line " + std::to_string(position.line));
    units += d->code_point >= 0x10000 ? 2 : 1;
    i += d->length;
  }
  return i;
}

std::string path_to_uri(const std::filesystem::path& path) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out = "file://";
  for (unsigned char c : std::filesystem::absolute(path).lexically_normal().generic_string()) {
    if (std::isalnum(c) || c == '/' || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 15]);
    }
  }
  return out;
}

std::optional<std::filesystem::path> uri_to_path(std::string_view uri) {
  constexpr std::string_view scheme = "file://";
  if (uri.substr(0, scheme.size()) != scheme) return std::nullopt;
  uri.remove_prefix(scheme.size());
  std::string out;
  for (std::size_t i = 0; i < uri.size(); ++i) {
    if (uri[i] == '%' && i + 2 < uri.size()) {
      int value = 0;
      const auto [ptr, ec] = std::from_chars(uri.data() + i + 1, uri.data() + i + 3, value, 16);
      if (ec == std::errc() && ptr == uri.data() + i + 3) {
        out.push_back(static_cast<char>(value));
        i += 2;
        continue;
      }
    }
    out.push_back(uri[i]);
  }
  return std::filesystem::path(out).lexically_normal();
}

}  // namespace ratg::lsp
