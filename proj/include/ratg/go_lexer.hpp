#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ratg::go {

enum class TokenKind {
  identifier,
  keyword,
  number,
  rune,
  string,      // interpreted "..."
  raw_string,  // `...`
  op,          // operators and delimiters
  comment,
  semicolon,   // explicit ';' or one inserted at a line end
};

struct Token {
  TokenKind kind;
  std::size_t begin;  // byte offsets into the scanned text
  std::size_t end;
  std::string_view text;  // empty for inserted semicolons
  bool inserted = false;
};

/// Scans Go source into tokens following the language's lexical grammar,
/// including automatic semicolon insertion. Comments are kept as tokens.
/// Throws ScanError on an unterminated literal or comment or invalid UTF-8.
std::vector<Token> tokenize(std::string_view src);

/// The 25 Go keywords.
std::span<const std::string_view> keywords();
/// Names of the Go 1.21 universe block (types, constants, nil, builtins).
std::span<const std::string_view> predeclared();

bool is_keyword(std::string_view s);
bool is_predeclared(std::string_view s);

/// 1-based line number of `offset` in `src`.
std::size_t line_of(std::string_view src, std::size_t offset);

}  // namespace ratg::go
