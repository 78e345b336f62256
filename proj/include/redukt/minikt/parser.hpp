#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "redukt/minikt/lexer.hpp"
#include "redukt/minikt/syntax.hpp"

namespace redukt::minikt {

namespace detail {

struct ParseAbort {
  SyntaxError error;
};

class Parser {
 public:
  Parser(std::string source, std::vector<Token> tokens)
      : source_(std::move(source)), tokens_(std::move(tokens)) {
    starts_line_.resize(tokens_.size(), false);
    int prev_end_line = 0;  // before first line
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (tokens_[i].kind == TokenKind::Comment) continue;
      starts_line_[i] = tokens_[i].line > prev_end_line;
      prev_end_line = tokens_[i].line;
      for (char c : tokens_[i].text)
        if (c == '\n') ++prev_end_line;
    }
  }

  ParseResult run() {
    ParseResult result;
    try {
      int root = parse_file();
      finalize(root);
      result.tree = SyntaxTree(std::move(source_), std::move(tokens_), std::move(nodes_), 0);
    } catch (const ParseAbort& a) {
      result.errors.push_back(a.error);
    }
    return result;
  }

 private:
  // ---- token cursor -------------------------------------------------------

  int peek() const {  // next non-comment token index, or -1 at EOF
    std::size_t i = pos_;
    while (i < tokens_.size() && tokens_[i].kind == TokenKind::Comment) ++i;
    return i < tokens_.size() ? static_cast<int>(i) : -1;
  }
  bool at_end() const { return peek() < 0; }
  const Token& tok(int i) const { return tokens_[static_cast<std::size_t>(i)]; }

  bool at(std::string_view text) const {
    int i = peek();
    return i >= 0 && tok(i).text == text;
  }
  bool at_kind(TokenKind k) const {
    int i = peek();
    return i >= 0 && tok(i).kind == k;
  }
  bool next_starts_line() const {
    int i = peek();
    return i < 0 || starts_line_[static_cast<std::size_t>(i)];
  }

  int advance() {  // consume next non-comment token, return its index
    int i = peek();
    if (i < 0) fail("unexpected end of file");
    pos_ = static_cast<std::size_t>(i) + 1;
    return i;
  }
  int expect(std::string_view text, const char* what) {
    if (!at(text)) fail(std::string("expected '") + std::string(text) + "' " + what);
    return advance();
  }
  int expect_ident(const char* what) {
    if (!at_kind(TokenKind::Identifier)) fail(std::string("expected identifier ") + what);
    return advance();
  }

  [[noreturn]] void fail(const std::string& msg) const {
    int i = peek();
    if (i >= 0) throw ParseAbort{{tok(i).line, tok(i).col, msg + " (found '" + tok(i).text + "')"}};
    int line = 1, col = 1;
    if (!tokens_.empty()) {
      const Token& last = tokens_.back();
      line = last.line;
      col = last.col + static_cast<int>(last.text.size());
    }
    throw ParseAbort{{line, col, msg + " (at end of file)"}};
  }

  // ---- node construction --------------------------------------------------

  int make(NodeKind kind, bool deletable, int first) {
    Node n;
    n.kind = kind;
    n.deletable = deletable;
    n.first = first;
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }
  void attach(int parent, int child) {
    nodes_[static_cast<std::size_t>(parent)].children.push_back(child);
    nodes_[static_cast<std::size_t>(child)].parent = parent;
  }
  void close(int id) { nodes_[static_cast<std::size_t>(id)].end = static_cast<int>(pos_trimmed()); }

  // End of span: one past the last non-comment token consumed. Trailing
  // comments between constructs stay with the enclosing node.
  std::size_t pos_trimmed() const {
    std::size_t i = pos_;
    while (i > 0 && tokens_[i - 1].kind == TokenKind::Comment) --i;
    return i;
  }

  // ---- grammar ------------------------------------------------------------

  int parse_file() {
    int file = make(NodeKind::File, false, 0);
    while (at("import")) {
      int imp = make(NodeKind::Import, true, advance());
      expect_ident("after 'import'");
      while (at(".")) {
        advance();
        expect_ident("in import path");
      }
      close(imp);
      attach(file, imp);
    }
    while (!at_end()) {
      attach(file, parse_top_level());
    }
    nodes_[static_cast<std::size_t>(file)].end = static_cast<int>(tokens_.size());
    nodes_[static_cast<std::size_t>(file)].first = 0;
    return file;
  }

  int parse_top_level() {
    if (at("fun")) return parse_fun(true);
    if (at("class")) return parse_class();
    if (at("val") || at("var")) return parse_property(true);
    if (at("import")) fail("imports must precede declarations");
    fail("expected a top-level declaration");
  }

  int parse_class() {
    int cls = make(NodeKind::ClassDecl, true, peek());
    expect("class", "to begin class declaration");
    expect_ident("for class name");
    if (at("(")) {
      int list = make(NodeKind::CtorParamList, true, peek());
      advance();
      if (!at(")")) {
        if (!at_kind(TokenKind::Identifier) && !at("val") && !at("var"))
          fail("unbalanced '(' in constructor parameter list");
        attach(list, parse_ctor_param());
        while (at(",")) {
          advance();
          attach(list, parse_ctor_param());
        }
      }
      expect(")", "to close constructor parameters");
      close(list);
      attach(cls, list);
    }
    if (at("{")) {
      int body = make(NodeKind::ClassBody, true, peek());
      advance();
      while (!at("}")) {
        if (at("fun"))
          attach(body, parse_fun(true));
        else if (at("val") || at("var"))
          attach(body, parse_property(true));
        else
          fail("expected a class member");
      }
      expect("}", "to close class body");
      close(body);
      attach(cls, body);
    }
    close(cls);
    return cls;
  }

  int parse_ctor_param() {
    int p = make(NodeKind::CtorParam, true, peek());
    if (at("val") || at("var")) advance();
    expect_ident("for parameter name");
    expect(":", "after parameter name");
    attach(p, parse_type());
    close(p);
    return p;
  }

  int parse_fun(bool deletable) {
    int fn = make(NodeKind::FunDecl, deletable, peek());
    expect("fun", "to begin function");
    expect_ident("for function name");
    int params = make(NodeKind::ParamList, false, peek());
    expect("(", "to open parameter list");
    if (!at(")")) {
      if (!at_kind(TokenKind::Identifier)) fail("unbalanced '(' in parameter list");
      attach(params, parse_param());
      while (at(",")) {
        advance();
        attach(params, parse_param());
      }
    }
    expect(")", "to close parameter list");
    close(params);
    attach(fn, params);
    if (at(":")) {
      int rt = make(NodeKind::ReturnType, true, peek());
      advance();
      attach(rt, parse_type());
      close(rt);
      attach(fn, rt);
    }
    if (at("{")) {
      attach(fn, parse_block());
    } else if (at("=")) {
      int eb = make(NodeKind::ExprBody, false, peek());
      advance();
      attach(eb, parse_expression(true));
      close(eb);
      attach(fn, eb);
    } else {
      fail("expected function body");
    }
    close(fn);
    return fn;
  }

  int parse_param() {
    int p = make(NodeKind::Param, true, peek());
    expect_ident("for parameter name");
    expect(":", "after parameter name");
    attach(p, parse_type());
    close(p);
    return p;
  }

  int parse_type() {
    int t = make(NodeKind::TypeRef, false, peek());
    expect_ident("for type name");
    while (at(".")) {
      advance();
      expect_ident("in qualified type name");
    }
    if (at("?")) advance();
    close(t);
    return t;
  }

  int parse_property(bool deletable) {
    int prop = make(NodeKind::PropertyDecl, deletable, peek());
    advance();  // val | var
    expect_ident("for property name");
    if (at(":")) {
      int ta = make(NodeKind::TypeAnnot, true, peek());
      advance();
      attach(ta, parse_type());
      close(ta);
      attach(prop, ta);
    }
    if (at("=")) {
      int init = make(NodeKind::Initializer, true, peek());
      advance();
      attach(init, parse_expression(true));
      close(init);
      attach(prop, init);
    }
    close(prop);
    return prop;
  }

  int parse_block() {
    int blk = make(NodeKind::Block, false, peek());
    expect("{", "to open block");
    while (!at("}")) {
      attach(blk, parse_statement(true));
    }
    expect("}", "to close block");
    close(blk);
    return blk;
  }

  int parse_control_body() {
    if (at("{")) return parse_block();
    return parse_statement(false);
  }

  int parse_statement(bool deletable) {
    if (at_end()) fail("expected a statement");
    if (at("val") || at("var")) return parse_property(deletable);
    if (at("if")) return parse_if(deletable);
    if (at("while")) return parse_while(deletable);
    if (at("return")) return parse_return(deletable);
    if (at("fun") || at("class")) fail("declarations other than val/var cannot appear in a block");

    int first = peek();
    int expr = parse_expression(true);
    if (at("=")) {
      const Node& e = nodes_[static_cast<std::size_t>(expr)];
      bool assignable = e.kind == NodeKind::IdentExpr;
      if (e.kind == NodeKind::PostfixExpr && !e.children.empty())
        assignable =
            nodes_[static_cast<std::size_t>(e.children.back())].kind == NodeKind::MemberSuffix;
      if (!assignable) fail("invalid assignment target");
      int asg = make(NodeKind::AssignStmt, deletable, first);
      attach(asg, expr);
      advance();  // '='
      attach(asg, parse_expression(true));
      close(asg);
      return asg;
    }
    int stmt = make(NodeKind::ExprStmt, deletable, first);
    attach(stmt, expr);
    close(stmt);
    return stmt;
  }

  int parse_if(bool deletable) {
    int stmt = make(NodeKind::IfStmt, deletable, peek());
    expect("if", "to begin if statement");
    attach(stmt, parse_condition());
    attach(stmt, parse_control_body());
    if (at("else")) {
      int els = make(NodeKind::ElseClause, true, peek());
      advance();
      attach(els, parse_control_body());
      close(els);
      attach(stmt, els);
    }
    close(stmt);
    return stmt;
  }

  int parse_while(bool deletable) {
    int stmt = make(NodeKind::WhileStmt, deletable, peek());
    expect("while", "to begin while statement");
    attach(stmt, parse_condition());
    attach(stmt, parse_control_body());
    close(stmt);
    return stmt;
  }

  int parse_condition() {
    int cond = make(NodeKind::Condition, false, peek());
    expect("(", "to open condition");
    ++paren_depth_;
    attach(cond, parse_expression(false));
    --paren_depth_;
    expect(")", "to close condition");
    close(cond);
    return cond;
  }

  int parse_return(bool deletable) {
    int stmt = make(NodeKind::ReturnStmt, deletable, peek());
    expect("return", "to begin return statement");
    if (!at_end() && !at("}") && !at("else") && !next_starts_line())
      attach(stmt, parse_expression(true));
    close(stmt);
    return stmt;
  }

  // Expressions. `stop_at_line_break` applies outside parentheses: a leading
  // infix operator or a call-suffix '(' on a fresh line ends the expression.
  bool line_break_blocks(bool sensitive) const {
    return sensitive && paren_depth_ == 0 && next_starts_line();
  }

  int parse_expression(bool sensitive) { return parse_elvis(sensitive); }

  int parse_elvis(bool sensitive) {
    int lhs = parse_disjunction(sensitive);
    if (at("?:") && !line_break_blocks(sensitive)) {
      int node = make(NodeKind::ElvisExpr, false, nodes_[static_cast<std::size_t>(lhs)].first);
      attach(node, lhs);
      int tail = make(NodeKind::ElvisTail, true, peek());
      advance();
      attach(tail, parse_elvis(sensitive));  // right-assoc
      close(tail);
      attach(node, tail);
      close(node);
      return node;
    }
    return lhs;
  }

  template <typename Sub>
  int parse_left_chain(bool sensitive, const std::vector<std::string_view>& ops, Sub sub) {
    int lhs = sub(sensitive);
    while (true) {
      bool matched = false;
      for (auto op : ops) {
        if (at(op) && !line_break_blocks(sensitive)) {
          int node =
              make(NodeKind::BinaryExpr, false, nodes_[static_cast<std::size_t>(lhs)].first);
          attach(node, lhs);
          int tail = make(NodeKind::BinaryTail, true, peek());
          advance();
          attach(tail, sub(sensitive));
          close(tail);
          attach(node, tail);
          close(node);
          lhs = node;
          matched = true;
          break;
        }
      }
      if (!matched) return lhs;
    }
  }

  int parse_disjunction(bool s) {
    return parse_left_chain(s, {"||"}, [this](bool s2) { return parse_conjunction(s2); });
  }
  int parse_conjunction(bool s) {
    return parse_left_chain(s, {"&&"}, [this](bool s2) { return parse_equality(s2); });
  }
  int parse_equality(bool s) {
    return parse_left_chain(s, {"==", "!="}, [this](bool s2) { return parse_comparison(s2); });
  }
  int parse_comparison(bool s) {
    return parse_left_chain(s, {"<=", ">=", "<", ">"},
                            [this](bool s2) { return parse_type_check(s2); });
  }

  int parse_type_check(bool sensitive) {
    int lhs = parse_additive(sensitive);
    if ((at("is") || at("as")) && !line_break_blocks(sensitive)) {
      int node = make(NodeKind::IsAsExpr, false, nodes_[static_cast<std::size_t>(lhs)].first);
      attach(node, lhs);
      int tail = make(NodeKind::IsAsTail, true, peek());
      advance();
      attach(tail, parse_type());
      close(tail);
      attach(node, tail);
      close(node);
      return node;
    }
    return lhs;
  }

  int parse_additive(bool s) {
    return parse_left_chain(s, {"+", "-"}, [this](bool s2) { return parse_multiplicative(s2); });
  }
  int parse_multiplicative(bool s) {
    return parse_left_chain(s, {"*", "/"}, [this](bool s2) { return parse_unary(s2); });
  }

  int parse_unary(bool sensitive) {
    if (at("!") || at("-")) {
      int node = make(NodeKind::UnaryExpr, false, peek());
      advance();
      attach(node, parse_unary(sensitive));
      close(node);
      return node;
    }
    return parse_postfix(sensitive);
  }

  int parse_postfix(bool sensitive) {
    int primary = parse_primary(sensitive);
    std::vector<int> suffixes;
    while (true) {
      if (at("(") && !line_break_blocks(sensitive)) {
        int call = make(NodeKind::CallSuffix, true, peek());
        advance();
        ++paren_depth_;
        if (!at(")")) {
          attach(call, parse_expression(false));
          while (at(",")) {
            advance();
            attach(call, parse_expression(false));
          }
        }
        --paren_depth_;
        expect(")", "to close call arguments");
        close(call);
        suffixes.push_back(call);
      } else if (at(".")) {  // member chains may continue across lines
        int mem = make(NodeKind::MemberSuffix, true, peek());
        advance();
        expect_ident("after '.'");
        close(mem);
        suffixes.push_back(mem);
      } else {
        break;
      }
    }
    if (suffixes.empty()) return primary;
    int node = make(NodeKind::PostfixExpr, false, nodes_[static_cast<std::size_t>(primary)].first);
    attach(node, primary);
    for (int s : suffixes) attach(node, s);
    close(node);
    return node;
  }

  int parse_primary(bool sensitive) {
    if (at_end()) fail("expected an expression");
    int i = peek();
    const Token& t = tok(i);
    if (t.kind == TokenKind::Number || t.kind == TokenKind::String || t.text == "true" ||
        t.text == "false" || t.text == "null") {
      int node = make(NodeKind::LiteralExpr, false, i);
      advance();
      close(node);
      return node;
    }
    if (t.kind == TokenKind::Identifier) {
      int node = make(NodeKind::IdentExpr, false, i);
      advance();
      close(node);
      return node;
    }
    if (t.text == "(") {
      int node = make(NodeKind::ParenExpr, false, i);
      advance();
      ++paren_depth_;
      attach(node, parse_expression(false));
      --paren_depth_;
      expect(")", "to close parenthesized expression");
      close(node);
      return node;
    }
    fail("expected an expression");
    (void)sensitive;
  }

  // ---- finalize: renumber preorder, compute depths ---------------------

  void finalize(int root) {
    std::vector<Node> ordered;
    ordered.reserve(nodes_.size());
    std::vector<std::pair<int, int>> stack;  // (old id, new parent)
    stack.emplace_back(root, -1);
    while (!stack.empty()) {
      auto [old_id, new_parent] = stack.back();
      stack.pop_back();
      Node n = nodes_[static_cast<std::size_t>(old_id)];
      int new_id = static_cast<int>(ordered.size());
      n.parent = new_parent;
      n.depth = new_parent < 0 ? 0 : ordered[static_cast<std::size_t>(new_parent)].depth + 1;
      std::vector<int> old_children = std::move(n.children);
      n.children.clear();
      ordered.push_back(std::move(n));
      for (auto it = old_children.rbegin(); it != old_children.rend(); ++it)
        stack.emplace_back(*it, new_id);
    }
    for (std::size_t i = 1; i < ordered.size(); ++i)
      ordered[static_cast<std::size_t>(ordered[i].parent)].children.push_back(
          static_cast<int>(i));
    nodes_ = std::move(ordered);
  }

  std::string source_;
  std::vector<Token> tokens_;
  std::vector<Node> nodes_;
  std::vector<bool> starts_line_;
  std::size_t pos_ = 0;
  int paren_depth_ = 0;
};

}  // namespace detail

// Parse a MiniKt compilation unit. On failure the error list is non-empty
// and no tree is produced; lexical errors fail the parse as well.
inline ParseResult parse(std::string text) {
  std::vector<LexError> lex_errors;
  auto tokens = lex(text, &lex_errors);
  if (!lex_errors.empty()) {
    ParseResult r;
    for (const auto& e : lex_errors) r.errors.push_back({e.line, e.col, e.message});
    return r;
  }
  detail::Parser p(std::move(text), std::move(tokens));
  return p.run();
}

}  // namespace redukt::minikt
