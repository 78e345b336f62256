#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "redukt/minikt/lexer.hpp"

namespace redukt::minikt {

enum class NodeKind {
  File,
  Import,
  ClassDecl,
  CtorParamList,
  CtorParam,
  ClassBody,
  FunDecl,
  ParamList,
  Param,
  ReturnType,
  ExprBody,
  Block,
  PropertyDecl,
  TypeAnnot,
  Initializer,
  AssignStmt,
  IfStmt,
  Condition,
  ElseClause,
  WhileStmt,
  ReturnStmt,
  ExprStmt,
  ElvisExpr,
  ElvisTail,
  BinaryExpr,
  BinaryTail,
  IsAsExpr,
  IsAsTail,
  UnaryExpr,
  PostfixExpr,
  CallSuffix,
  MemberSuffix,
  ParenExpr,
  LiteralExpr,
  IdentExpr,
  TypeRef,
};

inline const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::File: return "File";
    case NodeKind::Import: return "Import";
    case NodeKind::ClassDecl: return "ClassDecl";
    case NodeKind::CtorParamList: return "CtorParamList";
    case NodeKind::CtorParam: return "CtorParam";
    case NodeKind::ClassBody: return "ClassBody";
    case NodeKind::FunDecl: return "FunDecl";
    case NodeKind::ParamList: return "ParamList";
    case NodeKind::Param: return "Param";
    case NodeKind::ReturnType: return "ReturnType";
    case NodeKind::ExprBody: return "ExprBody";
    case NodeKind::Block: return "Block";
    case NodeKind::PropertyDecl: return "PropertyDecl";
    case NodeKind::TypeAnnot: return "TypeAnnot";
    case NodeKind::Initializer: return "Initializer";
    case NodeKind::AssignStmt: return "AssignStmt";
    case NodeKind::IfStmt: return "IfStmt";
    case NodeKind::Condition: return "Condition";
    case NodeKind::ElseClause: return "ElseClause";
    case NodeKind::WhileStmt: return "WhileStmt";
    case NodeKind::ReturnStmt: return "ReturnStmt";
    case NodeKind::ExprStmt: return "ExprStmt";
    case NodeKind::ElvisExpr: return "ElvisExpr";
    case NodeKind::ElvisTail: return "ElvisTail";
    case NodeKind::BinaryExpr: return "BinaryExpr";
    case NodeKind::BinaryTail: return "BinaryTail";
    case NodeKind::IsAsExpr: return "IsAsExpr";
    case NodeKind::IsAsTail: return "IsAsTail";
    case NodeKind::UnaryExpr: return "UnaryExpr";
    case NodeKind::PostfixExpr: return "PostfixExpr";
    case NodeKind::CallSuffix: return "CallSuffix";
    case NodeKind::MemberSuffix: return "MemberSuffix";
    case NodeKind::ParenExpr: return "ParenExpr";
    case NodeKind::LiteralExpr: return "LiteralExpr";
    case NodeKind::IdentExpr: return "IdentExpr";
    case NodeKind::TypeRef: return "TypeRef";
  }
  return "?";
}

// CST node. Spans are half-open token index ranges over the file's token
// vector (comments included when they fall inside). `deletable` is decided
// by the grammar position the node occupies in its parent production:
// optional and repeated positions are deletable, mandatory ones are not.
struct Node {
  NodeKind kind = NodeKind::File;
  int first = 0;  // index of first token
  int end = 0;    // one past last token
  int parent = -1;
  int depth = 0;
  int weight = 0;  // non-comment tokens in span
  bool deletable = false;
  std::vector<int> children;
};

struct SyntaxError {
  int line = 1;
  int col = 1;
  std::string message;
};

class SyntaxTree {
 public:
  SyntaxTree() = default;
  SyntaxTree(std::string source, std::vector<Token> tokens, std::vector<Node> nodes, int root)
      : source_(std::move(source)), tokens_(std::move(tokens)), nodes_(std::move(nodes)),
        root_(root) {
    counted_prefix_.resize(tokens_.size() + 1, 0);
    for (std::size_t i = 0; i < tokens_.size(); ++i)
      counted_prefix_[i + 1] = counted_prefix_[i] + (counts_as_token(tokens_[i]) ? 1 : 0);
    for (auto& n : nodes_) n.weight = counted_prefix_[n.end] - counted_prefix_[n.first];
  }

  const std::string& source() const { return source_; }
  const std::vector<Token>& tokens() const { return tokens_; }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  int root() const { return root_; }
  int size() const { return static_cast<int>(nodes_.size()); }

  // Byte range of the node's tokens in source(), half-open.
  std::pair<std::size_t, std::size_t> char_span(int id) const {
    const Node& n = node(id);
    if (n.first >= n.end) return {0, 0};
    const Token& a = tokens_[static_cast<std::size_t>(n.first)];
    const Token& b = tokens_[static_cast<std::size_t>(n.end - 1)];
    return {a.offset, b.offset + b.text.size()};
  }

  std::string text_of(int id) const {
    auto [b, e] = char_span(id);
    return source_.substr(b, e - b);
  }

  // All nodes whose depth equals `level`, in source order (root is level 0).
  std::vector<int> nodes_at_level(int level) const {
    std::vector<int> ids;
    for (int i = 0; i < size(); ++i)
      if (nodes_[static_cast<std::size_t>(i)].depth == level) ids.push_back(i);
    return ids;  // preorder ids are already source order
  }

  int height() const {
    int h = 0;
    for (const auto& n : nodes_) h = std::max(h, n.depth);
    return h;
  }

  int first_line(int id) const { return tokens_[static_cast<std::size_t>(node(id).first)].line; }
  int last_line(int id) const {
    const Token& t = tokens_[static_cast<std::size_t>(node(id).end - 1)];
    int extra = 0;
    for (char c : t.text)
      if (c == '\n') ++extra;
    return t.line + extra;
  }

 private:
  std::string source_;
  std::vector<Token> tokens_;
  std::vector<Node> nodes_;
  int root_ = -1;
  std::vector<int> counted_prefix_;
};

struct ParseResult {
  std::optional<SyntaxTree> tree;
  std::vector<SyntaxError> errors;
  bool ok() const { return tree.has_value() && errors.empty(); }
};

inline std::vector<int> nodes_at_level(const SyntaxTree& t, int level) {
  return t.nodes_at_level(level);
}

}  // namespace redukt::minikt
