#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "redukt/minikt/minikt.hpp"
#include "redukt/reducers.hpp"
#include "redukt/subprocess.hpp"

namespace redukt {

// One candidate string substitution, in byte coordinates of the text the
// generating pass saw.
struct Edit {
  std::size_t begin = 0;
  std::size_t end = 0;  // half-open
  std::string replacement;
  std::string description;
};

// Edits applied together, all-or-nothing. Multi-span refactorings (deleting
// a parameter together with its call-site arguments) must not be split.
using EditGroup = std::vector<Edit>;

struct TransformOptions {
  int inline_limit = 10;                                      // max statements to inline
  std::vector<std::pair<std::string, std::string>> patterns;  // user regex -> replacement
};

struct Transformation {
  enum class Kind { Text, Tree };
  std::string name;
  Kind kind = Kind::Text;
  bool project_safe = false;  // usable on files that do not hold the criterion
  std::function<std::vector<EditGroup>(const std::string&)> apply;
};

namespace transform_detail {

inline std::string apply_group(const std::string& text, EditGroup group) {
  std::sort(group.begin(), group.end(),
            [](const Edit& a, const Edit& b) { return a.begin > b.begin; });
  std::string out = text;
  for (const auto& e : group) out.replace(e.begin, e.end - e.begin, e.replacement);
  return out;
}

// Widen [begin, end) to whole lines when the span is the only content on
// them, so deletions do not leave blank lines behind.
inline std::pair<std::size_t, std::size_t> expand_to_lines(const std::string& text,
                                                           std::size_t begin, std::size_t end) {
  std::size_t b = begin;
  while (b > 0 && (text[b - 1] == ' ' || text[b - 1] == '\t')) --b;
  if (b != 0 && text[b - 1] != '\n') return {begin, end};
  std::size_t e = end;
  while (e < text.size() && (text[e] == ' ' || text[e] == '\t')) ++e;
  if (e < text.size()) {
    if (text[e] != '\n') return {begin, end};
    ++e;
  }
  return {b, e};
}

inline Edit line_delete(const std::string& text, std::size_t begin, std::size_t end,
                        std::string what) {
  auto [b, e] = expand_to_lines(text, begin, end);
  return Edit{b, e, "", std::move(what)};
}

inline std::vector<int> subtree_ends(const minikt::SyntaxTree& tree) {
  std::vector<int> ends(static_cast<std::size_t>(tree.size()));
  for (int id = tree.size() - 1; id >= 0; --id) {
    int e = id + 1;
    for (int c : tree.node(id).children) e = std::max(e, ends[static_cast<std::size_t>(c)]);
    ends[static_cast<std::size_t>(id)] = e;
  }
  return ends;
}

// Token-exact identifier rename; whitespace and everything else untouched.
inline std::string rename_idents(const std::string& text, const std::string& from,
                                 const std::string& to) {
  std::string trailing;
  auto tokens = minikt::lex(text, nullptr, &trailing);
  std::string out;
  for (const auto& t : tokens) {
    out += t.ws_before;
    out += (t.kind == minikt::TokenKind::Identifier && t.text == from) ? to : t.text;
  }
  out += trailing;
  return out;
}

inline std::string fresh_name(const std::string& taken, const std::string& base) {
  std::string name = base + "2";
  while (taken.find(name) != std::string::npos) name += "2";
  return name;
}

// ---- text families ---------------------------------------------------------

// (1) Drop everything inside a balanced pair of parentheses. Token-based, so
// parentheses inside strings and comments never match.
inline std::vector<EditGroup> paren_content_edits(const std::string& text) {
  auto tokens = minikt::lex(text);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // token indexes
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].text == "(")
      open.push_back(i);
    else if (tokens[i].text == ")" && !open.empty()) {
      pairs.emplace_back(open.back(), i);
      open.pop_back();
    }
  }
  std::sort(pairs.begin(), pairs.end());  // source order, outer before inner
  std::vector<EditGroup> out;
  for (auto [o, c] : pairs) {
    if (c == o + 1) continue;  // already empty
    out.push_back({Edit{tokens[o].offset + 1, tokens[c].offset, "", "drop parenthesized text"}});
  }
  return out;
}

// (2) Any string literal becomes the empty string.
inline std::vector<EditGroup> string_literal_edits(const std::string& text) {
  std::vector<EditGroup> out;
  for (const auto& t : minikt::lex(text))
    if (t.kind == minikt::TokenKind::String && t.text != "\"\"")
      out.push_back({Edit{t.offset, t.offset + t.text.size(), "\"\"", "empty the string literal"}});
  return out;
}

// (3) Numeric literals become 0 (or 0.0 to stay lexically a double).
inline std::vector<EditGroup> number_literal_edits(const std::string& text) {
  std::vector<EditGroup> out;
  for (const auto& t : minikt::lex(text)) {
    if (t.kind != minikt::TokenKind::Number) continue;
    std::string canonical = t.text.find('.') != std::string::npos ? "0.0" : "0";
    if (t.text != canonical)
      out.push_back({Edit{t.offset, t.offset + t.text.size(), canonical, "zero the number"}});
  }
  return out;
}

// (4) Pattern substitutions: `while` loops demoted to `if`, self-increment
// lines dropped, plus user-supplied regex -> replacement rules.
inline std::vector<EditGroup> pattern_edits(
    const std::string& text, const std::vector<std::pair<std::regex, std::string>>& user) {
  std::vector<EditGroup> out;
  for (const auto& t : minikt::lex(text))
    if (t.kind == minikt::TokenKind::Keyword && t.text == "while")
      out.push_back({Edit{t.offset, t.offset + 5, "if", "demote while to if"}});

  // whole lines of the form `x = x + 1`
  static const std::regex self_inc(R"(([A-Za-z_]\w*)\s*=\s*\1\s*\+\s*1)");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), self_inc);
       it != std::sregex_iterator(); ++it) {
    std::size_t b = static_cast<std::size_t>(it->position());
    std::size_t e = b + static_cast<std::size_t>(it->length());
    std::size_t ls = text.rfind('\n', b == 0 ? 0 : b - 1);
    ls = (ls == std::string::npos || b == 0) ? 0 : ls + 1;
    std::size_t le = text.find('\n', e);
    if (le == std::string::npos) le = text.size();
    auto blank = [&](std::size_t from, std::size_t to) {
      for (std::size_t i = from; i < to; ++i)
        if (text[i] != ' ' && text[i] != '\t') return false;
      return true;
    };
    if (blank(ls, b) && blank(e, le))
      out.push_back({line_delete(text, b, e, "drop self-increment")});
  }

  for (const auto& [re, replacement] : user)
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re);
         it != std::sregex_iterator(); ++it) {
      std::size_t b = static_cast<std::size_t>(it->position());
      std::size_t e = b + static_cast<std::size_t>(it->length());
      std::string formatted = it->format(replacement);
      if (formatted != text.substr(b, e - b))
        out.push_back({Edit{b, e, formatted, "apply user pattern"}});
    }
  return out;
}

// (5) Comment deletion.
inline std::vector<EditGroup> comment_edits(const std::string& text) {
  std::vector<EditGroup> out;
  for (const auto& t : minikt::lex(text))
    if (t.kind == minikt::TokenKind::Comment)
      out.push_back({line_delete(text, t.offset, t.offset + t.text.size(), "delete comment")});
  return out;
}

// ---- tree families ----------------------------------------------------------

// Run `fn` only when the file parses; tree transforms have no business
// editing text they cannot understand.
template <typename Fn>
std::function<std::vector<EditGroup>(const std::string&)> with_tree(Fn fn) {
  return [fn](const std::string& text) -> std::vector<EditGroup> {
    auto parsed = minikt::parse(text);
    if (!parsed.ok()) return {};
    return fn(text, *parsed.tree);
  };
}

// (a) `b ?: c` keeps only the fallback `c`.
inline std::vector<EditGroup> elvis_edits(const std::string&,
                                          const minikt::SyntaxTree& tree) {
  std::vector<EditGroup> out;
  for (int id = 0; id < tree.size(); ++id) {
    const auto& n = tree.node(id);
    if (n.kind != minikt::NodeKind::ElvisExpr || n.children.size() != 2) continue;
    const auto& tail = tree.node(n.children[1]);
    if (tail.children.empty()) continue;
    auto [b, e] = tree.char_span(id);
    out.push_back({Edit{b, e, tree.text_of(tail.children[0]), "keep elvis fallback"}});
  }
  return out;
}

// (b) Replace an `if` with one of its branches. Type checks in the
// condition become explicit casts in front of the kept branch: positive
// `v is T` checks guard the true branch, negated ones the false branch.
inline std::vector<EditGroup> if_simplify_edits(const std::string& text,
                                                const minikt::SyntaxTree& tree) {
  using minikt::NodeKind;
  auto ends = subtree_ends(tree);

  struct TypeCheck {
    std::string var, type;
    bool negated = false;
  };
  auto checks_in = [&](int cond) {
    std::vector<TypeCheck> checks;
    for (int id = cond; id < ends[static_cast<std::size_t>(cond)]; ++id) {
      const auto& n = tree.node(id);
      if (n.kind != NodeKind::IsAsExpr || n.children.size() != 2) continue;
      const auto& lhs = tree.node(n.children[0]);
      const auto& tail = tree.node(n.children[1]);
      if (lhs.kind != NodeKind::IdentExpr) continue;
      if (tree.tokens()[static_cast<std::size_t>(tail.first)].text != "is") continue;
      if (tail.children.empty()) continue;
      TypeCheck c;
      c.var = tree.tokens()[static_cast<std::size_t>(lhs.first)].text;
      c.type = tree.text_of(tail.children[0]);
      for (int at = n.parent; at >= 0 && at != tree.node(cond).parent; at = tree.node(at).parent)
        if (tree.node(at).kind == NodeKind::UnaryExpr &&
            tree.tokens()[static_cast<std::size_t>(tree.node(at).first)].text == "!")
          c.negated = !c.negated;
      checks.push_back(std::move(c));
    }
    return checks;
  };

  // Statements of a branch without the enclosing braces; a bare statement
  // is its own content.
  auto branch_content = [&](int body) -> std::string {
    if (body < 0) return "";
    const auto& n = tree.node(body);
    if (n.kind != NodeKind::Block) return tree.text_of(body);
    if (n.children.empty()) return "";
    std::size_t b = tree.char_span(n.children.front()).first;
    std::size_t e = tree.char_span(n.children.back()).second;
    return text.substr(b, e - b);
  };

  std::vector<EditGroup> out;
  for (int id = 0; id < tree.size(); ++id) {
    const auto& n = tree.node(id);
    if (n.kind != NodeKind::IfStmt || n.children.size() < 2) continue;
    int cond = n.children[0];
    int true_body = n.children[1];
    int false_body = -1;
    if (n.children.size() > 2 && tree.node(n.children[2]).kind == NodeKind::ElseClause &&
        !tree.node(n.children[2]).children.empty())
      false_body = tree.node(n.children[2]).children[0];

    auto checks = checks_in(cond);
    auto [if_b, if_e] = tree.char_span(id);
    auto candidate_for = [&](int body, bool want_negated, const char* which) {
      std::string content = branch_content(body);
      std::string casts;
      std::string taken = text;
      for (const auto& c : checks) {
        if (c.negated != want_negated) continue;
        std::string fresh = fresh_name(taken, c.var);
        taken += fresh;
        casts += "val " + fresh + " = " + c.var + " as " + c.type + "\n";
        content = rename_idents(content, c.var, fresh);
      }
      std::string replacement = casts + content;
      if (replacement.empty())
        out.push_back({line_delete(text, if_b, if_e, std::string("drop if, ") + which)});
      else
        out.push_back({Edit{if_b, if_e, std::move(replacement),
                            std::string("keep ") + which + " branch of if"}});
    };
    candidate_for(true_body, false, "true");
    candidate_for(false_body, true, "false");
  }
  return out;
}

// (c) Function bodies and initializers collapse to TODO().
inline std::vector<EditGroup> todo_edits(const std::string&,
                                         const minikt::SyntaxTree& tree) {
  using minikt::NodeKind;
  std::vector<EditGroup> out;
  auto expr_to_todo = [&](int expr) {
    std::string current = tree.text_of(expr);
    if (current == "TODO()" || minikt::count_tokens(current) <= 3) return;
    auto [b, e] = tree.char_span(expr);
    out.push_back({Edit{b, e, "TODO()", "reduce to TODO()"}});
  };
  for (int id = 0; id < tree.size(); ++id) {
    const auto& n = tree.node(id);
    if (n.kind == NodeKind::FunDecl) {
      for (int c : n.children) {
        if (tree.node(c).kind == NodeKind::Block) {
          // the replacement itself weighs 6 tokens; only shrink
          if (minikt::count_tokens(tree.text_of(c)) > 6) {
            auto [b, e] = tree.char_span(c);
            out.push_back({Edit{b, e, "{ return TODO() }", "body becomes TODO()"}});
          }
        } else if (tree.node(c).kind == NodeKind::ExprBody &&
                   !tree.node(c).children.empty()) {
          expr_to_todo(tree.node(c).children[0]);
        }
      }
    } else if (n.kind == NodeKind::Initializer && !n.children.empty()) {
      expr_to_todo(n.children[0]);
    }
  }
  return out;
}

// (d) Inline small top-level functions at their call sites, binding
// arguments through fresh vals; the declaration itself falls to the
// unused-function transform afterwards.
inline std::vector<EditGroup> inline_edits(const std::string& text,
                                           const minikt::SyntaxTree& tree, int limit) {
  using minikt::NodeKind;
  auto ends = subtree_ends(tree);

  struct Inlinee {
    std::string name;
    std::vector<std::string> params;
    std::vector<int> body_stmts;  // direct statements before the result
    int result_expr = -1;         // -1: function yields nothing
  };
  auto statement_kind = [](NodeKind k) {
    return k == NodeKind::PropertyDecl || k == NodeKind::AssignStmt || k == NodeKind::IfStmt ||
           k == NodeKind::WhileStmt || k == NodeKind::ReturnStmt || k == NodeKind::ExprStmt;
  };

  std::vector<Inlinee> funs;
  for (int fun : tree.node(tree.root()).children) {
    const auto& f = tree.node(fun);
    if (f.kind != NodeKind::FunDecl) continue;
    Inlinee info;
    info.name = tree.tokens()[static_cast<std::size_t>(f.first + 1)].text;

    int body = -1, stmt_count = 0;
    bool ok = true;
    for (int c : f.children) {
      if (tree.node(c).kind == NodeKind::ParamList)
        for (int p : tree.node(c).children)
          info.params.push_back(tree.tokens()[static_cast<std::size_t>(tree.node(p).first)].text);
      if (tree.node(c).kind == NodeKind::Block || tree.node(c).kind == NodeKind::ExprBody)
        body = c;
    }
    if (body < 0) continue;
    if (tree.node(body).kind == NodeKind::ExprBody) {
      if (tree.node(body).children.empty()) continue;
      info.result_expr = tree.node(body).children[0];
    } else {
      const auto& children = tree.node(body).children;
      for (std::size_t i = 0; i < children.size(); ++i) {
        if (tree.node(children[i]).kind == NodeKind::ReturnStmt) {
          if (i + 1 != children.size() || tree.node(children[i]).children.empty()) ok = false;
          else info.result_expr = tree.node(children[i]).children[0];
        } else {
          info.body_stmts.push_back(children[i]);
        }
      }
      // a return buried deeper than the body's last statement disqualifies
      for (int id = body; id < ends[static_cast<std::size_t>(body)]; ++id)
        if (tree.node(id).kind == NodeKind::ReturnStmt &&
            (children.empty() || id != children.back()))
          ok = false;
    }
    for (int id = body; id < ends[static_cast<std::size_t>(body)]; ++id) {
      if (statement_kind(tree.node(id).kind)) ++stmt_count;
      const auto& n = tree.node(id);
      if (n.kind == NodeKind::IdentExpr &&
          tree.tokens()[static_cast<std::size_t>(n.first)].text == info.name)
        ok = false;  // recursive
    }
    if (ok && stmt_count < limit) funs.push_back(std::move(info));
  }
  if (funs.empty()) return {};

  std::vector<EditGroup> out;
  for (int id = 0; id < tree.size(); ++id) {
    const auto& n = tree.node(id);
    if (n.kind != NodeKind::PostfixExpr || n.children.size() != 2) continue;
    if (tree.node(n.children[0]).kind != NodeKind::IdentExpr) continue;
    if (tree.node(n.children[1]).kind != NodeKind::CallSuffix) continue;
    const std::string& callee = tree.tokens()[static_cast<std::size_t>(n.first)].text;
    auto fn = std::find_if(funs.begin(), funs.end(),
                           [&](const Inlinee& f) { return f.name == callee; });
    if (fn == funs.end()) continue;
    const auto& args = tree.node(n.children[1]).children;
    if (args.size() != fn->params.size()) continue;

    int stmt = -1;
    for (int at = n.parent; at >= 0; at = tree.node(at).parent)
      if (statement_kind(tree.node(at).kind)) {
        stmt = at;
        break;
      }
    if (stmt < 0) continue;

    auto [stmt_b, stmt_e] = tree.char_span(stmt);
    auto [call_b, call_e] = tree.char_span(id);
    std::string stmt_text = text.substr(stmt_b, stmt_e - stmt_b);

    std::string taken = text;
    std::string bindings;
    std::vector<std::pair<std::string, std::string>> renames;
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string fresh = fresh_name(taken, fn->params[i]);
      taken += fresh;
      bindings += "val " + fresh + " = " + tree.text_of(args[static_cast<std::size_t>(i)]) + "\n";
      renames.emplace_back(fn->params[i], fresh);
    }
    auto renamed = [&](int node) {
      std::string s = tree.text_of(node);
      for (const auto& [from, to] : renames) s = rename_idents(s, from, to);
      return s;
    };

    std::string body_lines;
    for (int s : fn->body_stmts) body_lines += renamed(s) + "\n";

    std::string final_stmt;
    if (fn->result_expr >= 0) {
      std::string result = renamed(fn->result_expr);
      if (minikt::count_tokens(result) > 1) result = "(" + result + ")";
      final_stmt = stmt_text.substr(0, call_b - stmt_b) + result +
                   stmt_text.substr(call_e - stmt_b);
    } else {
      // no value produced: only a bare call statement can absorb the body
      if (tree.node(stmt).kind != NodeKind::ExprStmt) continue;
      auto [ib, ie] = tree.char_span(stmt);
      if (ib != call_b || ie != call_e) continue;  // call is not the whole statement
      if (!body_lines.empty()) body_lines.pop_back();  // trailing newline
      final_stmt = "";
    }

    std::string replacement = bindings + body_lines + final_stmt;
    if (replacement.empty()) continue;
    if (minikt::count_tokens(replacement) > minikt::count_tokens(stmt_text)) continue;
    out.push_back({Edit{stmt_b, stmt_e, std::move(replacement),
                        "inline call to " + fn->name}});
  }
  return out;
}

// (e) Delete a parameter no identifier in the body mentions, together with
// the matching argument at every same-file call site.
inline std::vector<EditGroup> unused_param_edits(const std::string& text,
                                                 const minikt::SyntaxTree& tree) {
  using minikt::NodeKind;
  (void)text;

  auto calls_to = [&](const std::string& name) {
    std::vector<int> suffixes;
    for (int id = 0; id < tree.size(); ++id) {
      const auto& n = tree.node(id);
      if (n.kind != NodeKind::PostfixExpr) continue;
      for (std::size_t j = 1; j < n.children.size(); ++j) {
        if (tree.node(n.children[j]).kind != NodeKind::CallSuffix) continue;
        const auto& prev = tree.node(n.children[j - 1]);
        std::string callee;
        if (j == 1 && prev.kind == NodeKind::IdentExpr)
          callee = tree.tokens()[static_cast<std::size_t>(prev.first)].text;
        else if (prev.kind == NodeKind::MemberSuffix)
          callee = tree.tokens()[static_cast<std::size_t>(prev.first + 1)].text;
        if (callee == name) suffixes.push_back(n.children[j]);
      }
    }
    return suffixes;
  };

  auto drop_nth = [&](const std::vector<int>& items, std::size_t k) -> Edit {
    auto [b, e] = tree.char_span(items[k]);
    if (k > 0)  // take the preceding comma along
      return Edit{tree.char_span(items[k - 1]).second, e, "", "drop argument"};
    if (items.size() > 1)  // first of several: take the following comma
      return Edit{b, tree.char_span(items[k + 1]).first, "", "drop argument"};
    return Edit{b, e, "", "drop argument"};
  };

  auto groups_for = [&](const std::string& owner, const std::vector<int>& params,
                        std::size_t k, const std::string& pname,
                        std::vector<EditGroup>& out) {
    EditGroup group;
    Edit decl = drop_nth(params, k);
    decl.description = "drop unused parameter " + pname + " of " + owner;
    group.push_back(decl);
    for (int call : calls_to(owner)) {
      const auto& args = tree.node(call).children;
      if (args.size() != params.size()) return;  // arity mismatch: stay away
      group.push_back(drop_nth(args, k));
    }
    out.push_back(std::move(group));
  };

  std::vector<EditGroup> out;
  for (int id = 0; id < tree.size(); ++id) {
    const auto& n = tree.node(id);
    if (n.kind == NodeKind::FunDecl) {
      int list = -1, body = -1;
      for (int c : n.children) {
        if (tree.node(c).kind == NodeKind::ParamList) list = c;
        if (tree.node(c).kind == NodeKind::Block || tree.node(c).kind == NodeKind::ExprBody)
          body = c;
      }
      if (list < 0 || body < 0 || tree.node(list).children.empty()) continue;
      const std::string& fname = tree.tokens()[static_cast<std::size_t>(n.first + 1)].text;
      const auto& params = tree.node(list).children;
      const auto& body_node = tree.node(body);
      for (std::size_t k = 0; k < params.size(); ++k) {
        const std::string& pname =
            tree.tokens()[static_cast<std::size_t>(tree.node(params[k]).first)].text;
        bool used = false;
        for (int t = body_node.first; t < body_node.end && !used; ++t)
          if (tree.tokens()[static_cast<std::size_t>(t)].kind == minikt::TokenKind::Identifier &&
              tree.tokens()[static_cast<std::size_t>(t)].text == pname)
            used = true;
        if (!used) groups_for(fname, params, k, pname, out);
      }
    } else if (n.kind == NodeKind::ClassDecl) {
      int list = -1;
      for (int c : n.children)
        if (tree.node(c).kind == NodeKind::CtorParamList) list = c;
      if (list < 0 || tree.node(list).children.empty()) continue;
      const std::string& cname = tree.tokens()[static_cast<std::size_t>(n.first + 1)].text;
      const auto& params = tree.node(list).children;
      for (std::size_t k = 0; k < params.size(); ++k) {
        const auto& p = tree.node(params[k]);
        int name_tok = p.first;
        const std::string& leading = tree.tokens()[static_cast<std::size_t>(name_tok)].text;
        if (leading == "val" || leading == "var") ++name_tok;
        const std::string& pname = tree.tokens()[static_cast<std::size_t>(name_tok)].text;
        bool used = false;
        for (int t = 0; t < static_cast<int>(tree.tokens().size()) && !used; ++t) {
          if (t >= p.first && t < p.end) continue;  // the declaration itself
          if (tree.tokens()[static_cast<std::size_t>(t)].kind == minikt::TokenKind::Identifier &&
              tree.tokens()[static_cast<std::size_t>(t)].text == pname)
            used = true;
        }
        if (!used) groups_for(cname, params, k, pname, out);
      }
    }
  }
  return out;
}

// (f) Remove top-level declarations nothing else names. Import tokens do
// not count as uses — a dangling import falls to the import transform next.
inline std::vector<EditGroup> unused_toplevel_edits(const std::string& text,
                                                    const minikt::SyntaxTree& tree) {
  using minikt::NodeKind;
  std::vector<char> in_import(tree.tokens().size(), 0);
  for (int id = 0; id < tree.size(); ++id)
    if (tree.node(id).kind == NodeKind::Import)
      for (int t = tree.node(id).first; t < tree.node(id).end; ++t)
        in_import[static_cast<std::size_t>(t)] = 1;

  std::vector<EditGroup> out;
  for (int decl : tree.node(tree.root()).children) {
    const auto& n = tree.node(decl);
    if (n.kind != NodeKind::FunDecl && n.kind != NodeKind::PropertyDecl &&
        n.kind != NodeKind::ClassDecl)
      continue;
    const std::string& name = tree.tokens()[static_cast<std::size_t>(n.first + 1)].text;
    bool used = false;
    for (int t = 0; t < static_cast<int>(tree.tokens().size()) && !used; ++t) {
      if ((t >= n.first && t < n.end) || in_import[static_cast<std::size_t>(t)]) continue;
      const auto& tok = tree.tokens()[static_cast<std::size_t>(t)];
      if (tok.kind == minikt::TokenKind::Identifier && tok.text == name) used = true;
    }
    if (used) continue;
    auto [b, e] = tree.char_span(decl);
    out.push_back({line_delete(text, b, e, "remove unused " + name)});
  }
  return out;
}

// (g) Remove imports whose final segment is never mentioned.
inline std::vector<EditGroup> unused_import_edits(const std::string& text,
                                                  const minikt::SyntaxTree& tree) {
  using minikt::NodeKind;
  std::vector<char> in_import(tree.tokens().size(), 0);
  std::vector<int> imports;
  for (int id = 0; id < tree.size(); ++id)
    if (tree.node(id).kind == NodeKind::Import) {
      imports.push_back(id);
      for (int t = tree.node(id).first; t < tree.node(id).end; ++t)
        in_import[static_cast<std::size_t>(t)] = 1;
    }

  std::vector<EditGroup> out;
  for (int imp : imports) {
    const auto& n = tree.node(imp);
    std::string name;
    for (int t = n.first; t < n.end; ++t)
      if (tree.tokens()[static_cast<std::size_t>(t)].kind == minikt::TokenKind::Identifier)
        name = tree.tokens()[static_cast<std::size_t>(t)].text;
    if (name.empty()) continue;
    bool used = false;
    for (int t = 0; t < static_cast<int>(tree.tokens().size()) && !used; ++t) {
      if (in_import[static_cast<std::size_t>(t)]) continue;
      const auto& tok = tree.tokens()[static_cast<std::size_t>(t)];
      if (tok.kind == minikt::TokenKind::Identifier && tok.text == name) used = true;
    }
    if (used) continue;
    auto [b, e] = tree.char_span(imp);
    out.push_back({line_delete(text, b, e, "remove unused import " + name)});
  }
  return out;
}

// (h) Replace returned expressions with a literal shaped like the declared
// return type.
inline std::vector<EditGroup> return_literal_edits(const std::string&,
                                                   const minikt::SyntaxTree& tree) {
  using minikt::NodeKind;
  auto ends = subtree_ends(tree);
  auto literal_for = [](const std::string& type) -> std::string {
    if (type == "Int") return "0";
    if (type == "Double") return "0.0";
    if (type == "String") return "\"\"";
    if (type == "Boolean") return "false";
    return "";
  };

  std::vector<EditGroup> out;
  for (int id = 0; id < tree.size(); ++id) {
    const auto& n = tree.node(id);
    if (n.kind != NodeKind::FunDecl) continue;
    std::string literal;
    for (int c : n.children)
      if (tree.node(c).kind == NodeKind::ReturnType && !tree.node(c).children.empty())
        literal = literal_for(tree.text_of(tree.node(c).children[0]));
    if (literal.empty()) continue;

    auto replace_expr = [&](int expr) {
      if (tree.text_of(expr) == literal) return;
      auto [b, e] = tree.char_span(expr);
      out.push_back({Edit{b, e, literal, "return a plain literal"}});
    };
    for (int c : n.children)
      if (tree.node(c).kind == NodeKind::ExprBody && !tree.node(c).children.empty())
        replace_expr(tree.node(c).children[0]);
    for (int sub = id; sub < ends[static_cast<std::size_t>(id)]; ++sub)
      if (tree.node(sub).kind == NodeKind::ReturnStmt && !tree.node(sub).children.empty())
        replace_expr(tree.node(sub).children[0]);
  }
  return out;
}

}  // namespace transform_detail

// The fixed text-transformation catalog, in application order. All of them
// are safe on any project file.
inline std::vector<Transformation> text_transforms(const TransformOptions& options = {}) {
  namespace td = transform_detail;
  auto make = [](std::string name, std::function<std::vector<EditGroup>(const std::string&)> fn) {
    Transformation t;
    t.name = std::move(name);
    t.kind = Transformation::Kind::Text;
    t.project_safe = true;
    t.apply = std::move(fn);
    return t;
  };

  std::vector<std::pair<std::regex, std::string>> compiled;
  for (const auto& [pattern, replacement] : options.patterns) {
    try {
      compiled.emplace_back(std::regex(pattern), replacement);
    } catch (const std::regex_error& e) {
      throw std::invalid_argument("invalid pattern '" + pattern + "': " + e.what());
    }
  }

  std::vector<Transformation> list;
  list.push_back(make("paren-content", td::paren_content_edits));
  list.push_back(make("string-literals", td::string_literal_edits));
  list.push_back(make("number-literals", td::number_literal_edits));
  list.push_back(make("patterns", [compiled](const std::string& text) {
    return td::pattern_edits(text, compiled);
  }));
  list.push_back(make("comments", td::comment_edits));
  return list;
}

// The fixed tree-transformation catalog, in application order. project_safe
// marks the ones that never need the reduction criterion's file: pruning of
// unused parts and interdependency simplification.
inline std::vector<Transformation> tree_transforms(const TransformOptions& options = {}) {
  namespace td = transform_detail;
  auto make = [](std::string name, bool safe,
                 std::function<std::vector<EditGroup>(const std::string&, const minikt::SyntaxTree&)> fn) {
    Transformation t;
    t.name = std::move(name);
    t.kind = Transformation::Kind::Tree;
    t.project_safe = safe;
    t.apply = td::with_tree(std::move(fn));
    return t;
  };

  int limit = options.inline_limit;
  std::vector<Transformation> list;
  list.push_back(make("elvis", false, td::elvis_edits));
  list.push_back(make("if-branches", false, td::if_simplify_edits));
  list.push_back(make("todo-bodies", true, td::todo_edits));
  list.push_back(make("inline-calls", false,
                      [limit](const std::string& text, const minikt::SyntaxTree& tree) {
                        return td::inline_edits(text, tree, limit);
                      }));
  list.push_back(make("unused-params", true, td::unused_param_edits));
  list.push_back(make("unused-toplevel", true, td::unused_toplevel_edits));
  list.push_back(make("unused-imports", true, td::unused_import_edits));
  list.push_back(make("return-literals", true, td::return_literal_edits));
  return list;
}

namespace transform_detail {

// Hard ceiling on fixpoint passes: adversarial user patterns (a -> b,
// b -> a) or mutually-inlinable functions could otherwise trade edits
// forever. Normal runs converge in two or three passes.
inline constexpr int kMaxFixpointPasses = 32;

// One generate-and-apply sweep. Accepted edits commit immediately; later
// candidates from the same generation are shifted around them and skipped
// when they overlap. Returns whether anything was kept.
inline bool fixpoint_pass(const Transformation& t, std::string& text,
                          const std::function<TestOutcome(const std::string&)>& accept) {
  auto groups = t.apply(text);
  struct Span {
    std::size_t begin, end;
    long delta;
  };
  std::vector<Span> committed;
  auto shift_of = [&](std::size_t at) {
    long s = 0;
    for (const auto& c : committed)
      if (c.end <= at) s += c.delta;
    return s;
  };
  auto overlaps = [&](const Edit& e) {
    for (const auto& c : committed)
      if (!(c.end <= e.begin || e.end <= c.begin)) return true;
    return false;
  };

  bool changed = false;
  for (const auto& group : groups) {
    if (group.empty()) continue;
    bool skip = false, noop = true;
    EditGroup shifted;
    for (const auto& e : group) {
      if (overlaps(e)) {
        skip = true;
        break;
      }
      Edit s = e;
      long d = shift_of(e.begin);
      s.begin = static_cast<std::size_t>(static_cast<long>(s.begin) + d);
      s.end = static_cast<std::size_t>(static_cast<long>(s.end) + d);
      if (text.compare(s.begin, s.end - s.begin, s.replacement) != 0) noop = false;
      shifted.push_back(std::move(s));
    }
    if (skip || noop) continue;

    std::string candidate = apply_group(text, shifted);
    if (!minikt::parse(candidate).ok()) continue;
    if (accept(candidate) != TestOutcome::Fail) continue;

    text = std::move(candidate);
    for (const auto& e : group)
      committed.push_back({e.begin, e.end,
                           static_cast<long>(e.replacement.size()) -
                               static_cast<long>(e.end - e.begin)});
    changed = true;
  }
  return changed;
}

}  // namespace transform_detail

// Apply one transformation to a single file until no candidate survives the
// check. Caller guarantees check(text) already FAILs; every kept edit
// reparses and still FAILs.
inline std::string run_to_fixpoint(const Transformation& t, std::string text,
                                   const SoundnessCheck& check) {
  for (int pass = 0; pass < transform_detail::kMaxFixpointPasses; ++pass)
    if (!transform_detail::fixpoint_pass(t, text, check)) break;
  return text;
}

using FileSetCheck = std::function<TestOutcome(const FileSet&)>;

// Multi-file variant: each file is reduced against a check over the whole
// candidate set, so cross-file breakage rolls back just like local breakage.
inline FileSet run_to_fixpoint(const Transformation& t, FileSet files,
                               const FileSetCheck& check) {
  for (int sweep = 0; sweep < transform_detail::kMaxFixpointPasses; ++sweep) {
    bool changed = false;
    for (std::size_t i = 0; i < files.size(); ++i) {
      auto file_check = [&](const std::string& candidate) {
        FileSet trial = files;
        trial[i].second = candidate;
        return check(trial);
      };
      for (int pass = 0; pass < transform_detail::kMaxFixpointPasses; ++pass) {
        if (!transform_detail::fixpoint_pass(t, files[i].second, file_check)) break;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return files;
}

}  // namespace redukt
