#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace redukt::minikt {

enum class TokenKind {
  Keyword,
  Identifier,
  Number,
  String,
  Operator,
  Punct,
  Comment,
};

struct Token {
  TokenKind kind = TokenKind::Punct;
  std::string text;       // exact source bytes of the token
  std::string ws_before;  // whitespace between the previous token and this one
  int line = 1;           // 1-based
  int col = 1;            // 1-based, in bytes
  std::size_t offset = 0; // byte offset of the first character
};

struct LexError {
  int line = 1;
  int col = 1;
  std::string message;
};

inline bool is_keyword(std::string_view s) {
  static const char* const kw[] = {"import", "fun",  "class", "val",  "var",
                                   "if",     "else", "while", "return",
                                   "is",     "as",   "true",  "false", "null"};
  for (const char* k : kw)
    if (s == k) return true;
  return false;
}

inline bool counts_as_token(const Token& t) { return t.kind != TokenKind::Comment; }

namespace detail {
inline bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool ident_part(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
inline bool digit(char c) { return c >= '0' && c <= '9'; }
}  // namespace detail

// Greedy lexer: never throws, always consumes the whole input. Unknown
// characters become one-byte Punct tokens plus an entry in *errors.
// Concatenating ws_before + text over all tokens (plus trailing whitespace,
// returned through *trailing_ws if non-null) reproduces the input exactly.
inline std::vector<Token> lex(std::string_view src, std::vector<LexError>* errors = nullptr,
                              std::string* trailing_ws = nullptr) {
  std::vector<Token> out;
  std::size_t i = 0, n = src.size();
  int line = 1, col = 1;
  std::string ws;

  auto advance = [&](std::size_t count) {
    for (std::size_t k = 0; k < count; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  auto push = [&](TokenKind kind, std::size_t begin, std::size_t len, int tline, int tcol) {
    Token t;
    t.kind = kind;
    t.text.assign(src.substr(begin, len));
    t.ws_before = ws;
    t.line = tline;
    t.col = tcol;
    t.offset = begin;
    ws.clear();
    out.push_back(std::move(t));
  };

  while (i < n) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ws.push_back(c);
      advance(1);
      continue;
    }
    const int tline = line, tcol = col;
    const std::size_t begin = i;

    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') advance(1);
      push(TokenKind::Comment, begin, i - begin, tline, tcol);
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      advance(2);
      bool closed = false;
      while (i < n) {
        if (src[i] == '*' && i + 1 < n && src[i + 1] == '/') {
          advance(2);
          closed = true;
          break;
        }
        advance(1);
      }
      if (!closed && errors) errors->push_back({tline, tcol, "unterminated block comment"});
      push(TokenKind::Comment, begin, i - begin, tline, tcol);
      continue;
    }
    if (detail::ident_start(c)) {
      while (i < n && detail::ident_part(src[i])) advance(1);
      std::string_view word = src.substr(begin, i - begin);
      push(is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier, begin, i - begin,
           tline, tcol);
      continue;
    }
    if (detail::digit(c)) {
      while (i < n && detail::digit(src[i])) advance(1);
      if (i + 1 < n && src[i] == '.' && detail::digit(src[i + 1])) {
        advance(1);
        while (i < n && detail::digit(src[i])) advance(1);
      }
      push(TokenKind::Number, begin, i - begin, tline, tcol);
      continue;
    }
    if (c == '"') {
      advance(1);
      bool closed = false;
      while (i < n) {
        if (src[i] == '\\' && i + 1 < n) {
          advance(2);
          continue;
        }
        if (src[i] == '"') {
          advance(1);
          closed = true;
          break;
        }
        if (src[i] == '\n') break;
        advance(1);
      }
      if (!closed && errors) errors->push_back({tline, tcol, "unterminated string literal"});
      push(TokenKind::String, begin, i - begin, tline, tcol);
      continue;
    }

    // Operators and punctuation, longest match first.
    static const char* const two[] = {"==", "!=", "<=", ">=", "&&", "||", "?:"};
    std::string_view rest = src.substr(i);
    bool matched = false;
    for (const char* op : two) {
      if (rest.size() >= 2 && rest.substr(0, 2) == op) {
        advance(2);
        push(TokenKind::Operator, begin, 2, tline, tcol);
        matched = true;
        break;
      }
    }
    if (matched) continue;

    switch (c) {
      case '+': case '-': case '*': case '/': case '<': case '>': case '!':
      case '=': case '.': case '?':
        advance(1);
        push(TokenKind::Operator, begin, 1, tline, tcol);
        continue;
      case '(': case ')': case '{': case '}': case ',': case ':':
        advance(1);
        push(TokenKind::Punct, begin, 1, tline, tcol);
        continue;
      default:
        if (errors)
          errors->push_back({tline, tcol, std::string("unexpected character '") + c + "'"});
        advance(1);
        push(TokenKind::Punct, begin, 1, tline, tcol);
        continue;
    }
  }
  if (trailing_ws) *trailing_ws = ws;
  return out;
}

// Number of non-comment tokens under greedy lexing. Total order for all
// reduction decisions; lower is smaller.
inline int count_tokens(std::string_view text) {
  auto toks = lex(text);
  int n = 0;
  for (const auto& t : toks)
    if (counts_as_token(t)) ++n;
  return n;
}

}  // namespace redukt::minikt
