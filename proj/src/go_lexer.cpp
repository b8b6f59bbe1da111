#include "ratg/go_lexer.hpp"

#include <algorithm>
#include <array>

#include "ratg/error.hpp"
#include "ratg/text.hpp"

namespace ratg::go {

namespace {

constexpr std::array<std::string_view, 25> kKeywords = {
    "break",  "case",   "chan",   "const",  "continue", "default", "defer",
    "else",   "fallthrough", "for", "func", "go",       "goto",    "if",
    "import", "interface",   "map", "package", "range", "return",  "select",
    "struct", "switch", "type",   "var"};

// Universe block as of Go 1.21.
constexpr std::array<std::string_view, 44> kPredeclared = {
    // types
    "any", "bool", "byte", "comparable", "complex64", "complex128", "error", "float32",
    "float64", "int", "int8", "int16", "int32", "int64", "rune", "string", "uint", "uint8",
    "uint16", "uint32", "uint64", "uintptr",
    // constants and zero value
    "true", "false", "iota", "nil",
    // functions
    "append", "cap", "clear", "close", "complex", "copy", "delete", "imag", "len", "make",
    "max", "min", "new", "panic", "print", "println", "real", "recover"};

// Longest operators first so a greedy prefix match is correct.
constexpr std::array<std::string_view, 48> kOperators = {
    "<<=", ">>=", "&^=", "...", "&&", "||", "<-", "++", "--", "==", "!=", "<=",
    ">=",  ":=",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>",
    "&^",  "+",   "-",   "*",   "/",  "%",  "&",  "|",  "^",  "<",  ">",  "=",
    "!",   "(",   ")",   "[",   "]",  "{",  "}",  ",",  ";",  ".",  ":",  "~"};

bool ends_statement(const Token& t) {
  switch (t.kind) {
    case TokenKind::identifier:
    case TokenKind::number:
    case TokenKind::rune:
    case TokenKind::string:
    case TokenKind::raw_string:
      return true;
    case TokenKind::keyword:
      return t.text == "break" || t.text == "continue" || t.text == "fallthrough" ||
             t.text == "return";
    case TokenKind::op:
      return t.text == "++" || t.text == "--" || t.text == ")" || t.text == "]" || t.text == "}";
    default:
      return false;
  }
}

bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }

class Scanner {
 public:
  explicit Scanner(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\n') {
        newline(pos_);
        ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else if (c == '/' && peek(1) == '/') {
        line_comment();
      } else if (c == '/' && peek(1) == '*') {
        block_comment();
      } else if (c == '"') {
        interpreted_string();
      } else if (c == '`') {
        raw_string();
      } else if (c == '\'') {
        rune_literal();
      } else if (is_ascii_digit(c) || (c == '.' && is_ascii_digit(peek(1)))) {
        number();
      } else if (auto d = text::decode_utf8(src_, pos_); d && text::is_go_letter(d->code_point)) {
        identifier();
      } else if (!operator_token()) {
        if (!text::decode_utf8(src_, pos_)) throw ScanError("invalid UTF-8", pos_);
        throw ScanError("unexpected character", pos_);
      }
    }
    newline(src_.size());
    return std::move(tokens_);
  }

 private:
  char peek(std::size_t ahead) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void push(TokenKind kind, std::size_t begin, std::size_t end) {
    tokens_.push_back(Token{kind, begin, end, src_.substr(begin, end - begin)});
    if (kind != TokenKind::comment) last_significant_ = tokens_.size() - 1;
  }

  void newline(std::size_t at) {
    if (last_significant_ == kNone) return;
    if (ends_statement(tokens_[last_significant_])) {
      tokens_.push_back(Token{TokenKind::semicolon, at, at, {}, true});
      last_significant_ = tokens_.size() - 1;
    }
  }

  void line_comment() {
    const std::size_t begin = pos_;
    while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
    push(TokenKind::comment, begin, pos_);
  }

  void block_comment() {
    const std::size_t begin = pos_;
    const std::size_t close = src_.find("*/", pos_ + 2);
    if (close == std::string_view::npos) throw ScanError("unterminated block comment", begin);
    pos_ = close + 2;
    const bool multiline = src_.substr(begin, pos_ - begin).find('\n') != std::string_view::npos;
    tokens_.push_back(Token{TokenKind::comment, begin, pos_, src_.substr(begin, pos_ - begin)});
    if (multiline) newline(begin);
  }

  void interpreted_string() {
    const std::size_t begin = pos_++;
    while (true) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') throw ScanError("unterminated string literal", begin);
      if (src_[pos_] == '\\') {
        pos_ += 2;
        continue;
      }
      if (src_[pos_++] == '"') break;
    }
    push(TokenKind::string, begin, pos_);
  }

  void raw_string() {
    const std::size_t begin = pos_;
    const std::size_t close = src_.find('`', pos_ + 1);
    if (close == std::string_view::npos) throw ScanError("unterminated raw string literal", begin);
    pos_ = close + 1;
    push(TokenKind::raw_string, begin, pos_);
  }

  void rune_literal() {
    const std::size_t begin = pos_++;
    while (true) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') throw ScanError("unterminated rune literal", begin);
      if (src_[pos_] == '\\') {
        pos_ += 2;
        continue;
      }
      if (src_[pos_++] == '\'') break;
    }
    push(TokenKind::rune, begin, pos_);
  }

  void number() {
    const std::size_t begin = pos_;
    const bool hex = src_[pos_] == '0' && (peek(1) == 'x' || peek(1) == 'X');
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      const bool alnum = is_ascii_digit(c) || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
      if (alnum || c == '.') {
        ++pos_;
        continue;
      }
      const char prev = src_[pos_ - 1];
      const bool exponent = hex ? (prev == 'p' || prev == 'P') : (prev == 'e' || prev == 'E');
      if ((c == '+' || c == '-') && exponent) {
        ++pos_;
        continue;
      }
      break;
    }
    push(TokenKind::number, begin, pos_);
  }

  void identifier() {
    const std::size_t begin = pos_;
    while (pos_ < src_.size()) {
      auto d = text::decode_utf8(src_, pos_);
      if (!d || !text::is_identifier_char(d->code_point)) break;
      pos_ += d->length;
    }
    const auto word = src_.substr(begin, pos_ - begin);
    push(is_keyword(word) ? TokenKind::keyword : TokenKind::identifier, begin, pos_);
  }

  bool operator_token() {
    const auto rest = src_.substr(pos_);
    for (auto op : kOperators) {
      if (rest.substr(0, op.size()) == op) {
        push(op == ";" ? TokenKind::semicolon : TokenKind::op, pos_, pos_ + op.size());
        pos_ += op.size();
        return true;
      }
    }
    return false;
  }

  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::string_view src_;
  std::size_t pos_ = 0;
  std::vector<Token> tokens_;
  std::size_t last_significant_ = kNone;
};

}  // namespace

std::vector<Token> tokenize(std::string_view src) { return Scanner(src).run(); }

std::span<const std::string_view> keywords() { return kKeywords; }
std::span<const std::string_view> predeclared() { return kPredeclared; }

bool is_keyword(std::string_view s) {
  return std::find(kKeywords.begin(), kKeywords.end(), s) != kKeywords.end();
}

bool is_predeclared(std::string_view s) {
  return std::find(kPredeclared.begin(), kPredeclared.end(), s) != kPredeclared.end();
}

std::size_t line_of(std::string_view src, std::size_t offset) {
  offset = std::min(offset, src.size());
  return 1 + static_cast<std::size_t>(std::count(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

}  // namespace ratg::go
