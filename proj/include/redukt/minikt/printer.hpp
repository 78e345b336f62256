#pragma once

#include <string>
#include <vector>

#include "redukt/minikt/lexer.hpp"
#include "redukt/minikt/syntax.hpp"

namespace redukt::minikt {

namespace detail {

class TokenWriter {
 public:
  void open_line_scope() { ++indent_; }
  void close_line_scope() { --indent_; }

  void newline() {
    if (!at_line_start_) {
      out_.push_back('\n');
      at_line_start_ = true;
    }
  }

  // Glue the next token onto the previous line (used for `else` after `}`).
  void join_previous_line() {
    if (!at_line_start_) return;
    while (!out_.empty() && (out_.back() == '\n' || out_.back() == ' ')) out_.pop_back();
    if (out_.empty()) {
      at_line_start_ = true;
      return;
    }
    at_line_start_ = false;
    last_text_ = out_.substr(out_.find_last_of(" \n(") + 1);
    pending_space_ = true;
  }

  void token(const Token& t) {
    if (at_line_start_) {
      for (int i = 0; i < indent_; ++i) out_ += "    ";
      at_line_start_ = false;
    } else if (needs_space(t)) {
      out_.push_back(' ');
    }
    out_ += t.text;
    last_text_ = t.text;
    last_kind_ = t.kind;
    have_last_ = true;
    pending_space_ = false;
    if (t.kind == TokenKind::Comment && t.text.rfind("//", 0) == 0) newline();
  }

  std::string take() { return std::move(out_); }

 private:
  bool needs_space(const Token& t) const {
    if (!have_last_) return pending_space_;
    const std::string& p = last_text_;
    const std::string& c = t.text;
    if (p == "(" || p == "." || p == "!") return false;
    if (c == ")" || c == "," || c == "." || c == ":" || c == "?") return false;
    if (c == "(") {
      // call suffixes hug the callee; keywords keep a space: `if (`, `return (`
      if (last_kind_ == TokenKind::Identifier || p == ")") return false;
      return true;
    }
    return true;
  }

  std::string out_;
  std::string last_text_;
  TokenKind last_kind_ = TokenKind::Punct;
  bool have_last_ = false;
  bool at_line_start_ = true;
  bool pending_space_ = false;
  int indent_ = 0;
};

class Printer {
 public:
  Printer(const SyntaxTree& tree, const std::vector<bool>* deleted)
      : tree_(tree), deleted_(deleted) {}

  std::string run() {
    if (alive(tree_.root())) emit(tree_.root());
    w_.newline();
    std::string s = w_.take();
    while (!s.empty() && s.back() == '\n') s.pop_back();
    if (!s.empty()) s.push_back('\n');
    return s;
  }

 private:
  bool alive(int id) const {
    return !(deleted_ && static_cast<std::size_t>(id) < deleted_->size() &&
             (*deleted_)[static_cast<std::size_t>(id)]);
  }
  const Node& node(int id) const { return tree_.node(id); }
  const Token& token(int i) const { return tree_.tokens()[static_cast<std::size_t>(i)]; }

  // Walk own tokens and children of `id` in token order, invoking the
  // callbacks. Dead children are skipped wholesale.
  template <typename OnToken, typename OnChild>
  void interleave(int id, OnToken on_token, OnChild on_child) {
    const Node& n = node(id);
    std::size_t next_child = 0;
    int t = n.first;
    while (t < n.end) {
      if (next_child < n.children.size()) {
        const Node& c = node(n.children[next_child]);
        if (t >= c.first) {
          if (alive(n.children[next_child])) on_child(n.children[next_child]);
          t = c.end;
          ++next_child;
          continue;
        }
      }
      on_token(t);
      ++t;
    }
  }

  bool line_element(NodeKind k) const {
    return k == NodeKind::File || k == NodeKind::Block || k == NodeKind::ClassBody;
  }

  void emit(int id) {
    const Node& n = node(id);
    switch (n.kind) {
      case NodeKind::File:
        interleave(
            id, [&](int t) { emit_own_line(t); },
            [&](int c) {
              emit(c);
              w_.newline();
            });
        break;

      case NodeKind::Block:
      case NodeKind::ClassBody: {
        // first own token is '{', last is '}'
        const Node& b = node(id);
        w_.token(token(b.first));
        w_.newline();
        w_.open_line_scope();
        std::size_t next_child = 0;
        for (int t = b.first + 1; t < b.end - 1;) {
          if (next_child < b.children.size()) {
            const Node& c = node(b.children[next_child]);
            if (t >= c.first) {
              if (alive(b.children[next_child])) {
                emit(b.children[next_child]);
                w_.newline();
              }
              t = c.end;
              ++next_child;
              continue;
            }
          }
          emit_own_line(t);
          ++t;
        }
        w_.close_line_scope();
        w_.newline();
        w_.token(token(b.end - 1));
        break;
      }

      case NodeKind::ParamList:
      case NodeKind::CtorParamList:
      case NodeKind::CallSuffix: {
        w_.token(token(n.first));  // '('
        bool first = true;
        for (int c : n.children) {
          if (!alive(c)) continue;
          if (!first) w_.token(comma_);
          emit(c);
          first = false;
        }
        w_.token(token(n.end - 1));  // ')'
        break;
      }

      case NodeKind::ElseClause:
        w_.join_previous_line();
        interleave(
            id, [&](int t) { w_.token(token(t)); }, [&](int c) { emit(c); });
        break;

      default:
        interleave(
            id, [&](int t) { w_.token(token(t)); }, [&](int c) { emit(c); });
        break;
    }
  }

  void emit_own_line(int t) {
    // comments (or stray tokens) directly owned by a line-structured node
    w_.newline();
    w_.token(token(t));
    w_.newline();
  }

  const SyntaxTree& tree_;
  const std::vector<bool>* deleted_;
  TokenWriter w_;
  Token comma_ = Token{TokenKind::Punct, ",", "", 0, 0, 0};
};

}  // namespace detail

// Canonical text for the tree: token-equivalent to the original source
// (identical non-comment token sequence) and guaranteed to reparse.
inline std::string print(const SyntaxTree& tree) {
  detail::Printer p(tree, nullptr);
  return p.run();
}

// Same, with every node whose id is marked true removed along with its
// subtree. Deleting the root yields an empty string.
inline std::string print(const SyntaxTree& tree, const std::vector<bool>& deleted) {
  detail::Printer p(tree, &deleted);
  return p.run();
}

// Byte-mask variant for callers tracking deletions as vector<char>.
inline std::string print(const SyntaxTree& tree, const std::vector<char>& deleted) {
  std::vector<bool> mask(deleted.begin(), deleted.end());
  return print(tree, mask);
}

}  // namespace redukt::minikt
