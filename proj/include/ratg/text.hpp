#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ratg::text {

struct DecodedChar {
  char32_t code_point;
  std::size_t length;  // bytes consumed, 1..4
};

/// Decodes the UTF-8 sequence starting at `offset`. Returns nullopt on a
/// malformed or truncated sequence.
std::optional<DecodedChar> decode_utf8(std::string_view text, std::size_t offset);

bool is_utf8_boundary(std::string_view text, std::size_t offset);

void append_utf8(std::string& out, char32_t code_point);

/// Go's `letter` production: Unicode letters and '_'.
bool is_go_letter(char32_t c);
/// Go's `unicode_digit` production.
bool is_go_digit(char32_t c);
inline bool is_identifier_char(char32_t c) { return is_go_letter(c) || is_go_digit(c); }

/// True iff `s` is lexically a Go identifier (keywords included).
bool is_identifier(std::string_view s);

std::string trim(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

}  // namespace ratg::text
