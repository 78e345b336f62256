#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "redukt/minikt/minikt.hpp"
#include "redukt/reducers.hpp"

namespace redukt {

struct SliceCriterion {
  std::string file;
  int statement = -1;    // flattened statement index within `function`, -1 = none
  std::string function;  // enclosing function ("Class.method" for members)
  std::string clazz;     // enclosing class name, if any
};

namespace detail {

// Tarjan; components come out in reverse topological order (callees first).
inline std::vector<std::vector<int>> strongly_connected(
    const std::vector<std::vector<int>>& adj) {
  int n = static_cast<int>(adj.size());
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<char> on_stack(n, 0);
  std::vector<std::vector<int>> components;
  int counter = 0;

  std::function<void(int)> visit = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = 1;
    for (int w : adj[v]) {
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<int> comp;
      while (true) {
        int w = stack.back();
        stack.pop_back();
        on_stack[w] = 0;
        comp.push_back(w);
        if (w == v) break;
      }
      components.push_back(std::move(comp));
    }
  };
  for (int v = 0; v < n; ++v)
    if (index[v] < 0) visit(v);
  return components;
}

}  // namespace detail

// Slicing state for one file: a syntax tree plus a mask of deleted nodes.
// Every deletion is gated by the soundness check and rolled back when the
// error stops reproducing.
class FileSlicer {
 public:
  FileSlicer(const minikt::SyntaxTree& tree, SoundnessCheck check)
      : tree_(&tree), check_(std::move(check)),
        mask_(static_cast<std::size_t>(tree.size()), 0),
        subtree_end_(static_cast<std::size_t>(tree.size()), 0) {
    for (int id = tree.size() - 1; id >= 0; --id) {
      int end = id + 1;
      for (int c : tree.node(id).children)
        end = std::max(end, subtree_end_[static_cast<std::size_t>(c)]);
      subtree_end_[static_cast<std::size_t>(id)] = end;
    }
  }

  static bool is_statement_kind(minikt::NodeKind k) {
    using minikt::NodeKind;
    return k == NodeKind::PropertyDecl || k == NodeKind::AssignStmt || k == NodeKind::IfStmt ||
           k == NodeKind::WhileStmt || k == NodeKind::ReturnStmt || k == NodeKind::ExprStmt;
  }

  bool alive(int id) const {
    for (int at = id; at >= 0; at = tree_->node(at).parent)
      if (mask_[static_cast<std::size_t>(at)]) return false;
    return true;
  }

  const DeletedMask& deleted() const { return mask_; }
  bool anything_deleted() const {
    return std::any_of(mask_.begin(), mask_.end(), [](char c) { return c != 0; });
  }
  std::string text() const { return minikt::print(*tree_, mask_); }

  // Live statements inside the function body, flattened in source order
  // (compound statements precede the statements nested in them).
  std::vector<int> function_statements(int fun) const {
    std::vector<int> ids;
    for (int id = fun + 1; id < subtree_end(fun); ++id)
      if (is_statement_kind(tree_->node(id).kind) && alive(id)) ids.push_back(id);
    return ids;
  }

  int enclosing(int id, minikt::NodeKind kind) const {
    for (int at = tree_->node(id).parent; at >= 0; at = tree_->node(at).parent)
      if (tree_->node(at).kind == kind) return at;
    return -1;
  }

  // --- statement level ------------------------------------------------

  // Backward slice of one function around the criterion statement: first
  // try to drop every line after the criterion, then walk backwards from
  // it keeping only lines the dependency set needs.
  void slice_function(int fun, int criterion) {
    auto lines = function_statements(fun);
    auto at = std::find(lines.begin(), lines.end(), criterion);
    if (at == lines.end())
      throw std::out_of_range("slice criterion is not a live statement of the function");
    std::size_t ci = static_cast<std::size_t>(at - lines.begin());

    for (std::size_t i = lines.size(); i-- > ci + 1;)
      if (alive(lines[i])) delete_if_sound({lines[i]});

    std::set<std::string> deps = reads_of(criterion);
    std::set<int> kept = {criterion};
    for (std::size_t i = ci; i-- > 0;) {
      int id = lines[i];
      if (!alive(id)) continue;
      if (depends_on(id, deps, kept)) {
        kept.insert(id);
        auto more = reads_of(id);
        deps.insert(more.begin(), more.end());
      } else {
        delete_if_sound({id});
      }
    }
  }

  // --- function level ---------------------------------------------------

  struct FunInfo {
    int id = -1;
    std::string name;   // bare name
    std::string clazz;  // enclosing class, empty for top level
    std::string key;    // "Class.name" or "name"
  };

  std::vector<FunInfo> declared_functions() const {
    std::vector<FunInfo> funs;
    for (int id = 0; id < tree_->size(); ++id) {
      if (tree_->node(id).kind != minikt::NodeKind::FunDecl || !alive(id)) continue;
      FunInfo f;
      f.id = id;
      f.name = token_text(tree_->node(id).first + 1);
      int cls = enclosing(id, minikt::NodeKind::ClassDecl);
      if (cls >= 0) f.clazz = token_text(tree_->node(cls).first + 1);
      f.key = f.clazz.empty() ? f.name : f.clazz + "." + f.name;
      funs.push_back(std::move(f));
    }
    return funs;
  }

  // Per-file call tree: function key -> keys of directly called functions.
  // Calls that cannot be resolved inside the file count as external and
  // contribute no edge.
  std::map<std::string, std::set<std::string>> build_call_tree() const {
    auto funs = declared_functions();
    std::map<std::string, std::set<std::string>> tree;
    for (const auto& f : funs) tree[f.key] = direct_callees(f, funs);
    return tree;
  }

  // Remove functions unreachable from the target's transitive call
  // closure, callers before callees, mutual-recursion cycles as one unit.
  void slice_file_functions(int target_fun) {
    auto funs = declared_functions();
    auto target = std::find_if(funs.begin(), funs.end(),
                               [&](const FunInfo& f) { return f.id == target_fun; });
    if (target == funs.end())
      throw std::invalid_argument("function slicing target is not a live function");

    auto call_tree = build_call_tree();
    std::set<std::string> used = {target->key};
    std::vector<std::string> work = {target->key};
    while (!work.empty()) {
      std::string key = std::move(work.back());
      work.pop_back();
      for (const auto& callee : call_tree[key])
        if (used.insert(callee).second) work.push_back(callee);
    }

    std::vector<const FunInfo*> removable;
    for (const auto& f : funs)
      if (!used.count(f.key)) removable.push_back(&f);
    remove_groups_in_dependency_order(removable, [&](const FunInfo& f) {
      std::set<std::string> out;
      for (const auto& callee : call_tree[f.key]) out.insert(callee);
      return out;
    });
  }

  // --- class level --------------------------------------------------------

  std::map<std::string, int> declared_classes() const {
    std::map<std::string, int> classes;
    for (int id = 0; id < tree_->size(); ++id)
      if (tree_->node(id).kind == minikt::NodeKind::ClassDecl && alive(id))
        classes.emplace(token_text(tree_->node(id).first + 1), id);
    return classes;
  }

  // Remove classes not referenced from the live code around the criterion:
  // the criterion's own class, plus all live top-level non-class
  // declarations, plus (transitively) everything the referenced classes
  // use themselves.
  void slice_classes(int criterion_node) {
    auto classes = declared_classes();
    if (classes.empty()) return;

    std::set<std::string> closure;
    std::vector<std::string> work;
    auto seed = [&](const std::string& name) {
      if (classes.count(name) && closure.insert(name).second) work.push_back(name);
    };

    int crit_class = enclosing(criterion_node, minikt::NodeKind::ClassDecl);
    if (crit_class >= 0) seed(token_text(tree_->node(crit_class).first + 1));
    for (int child : tree_->node(tree_->root()).children) {
      if (!alive(child) || tree_->node(child).kind == minikt::NodeKind::ClassDecl) continue;
      for (const auto& name : referenced_classes(child, classes)) seed(name);
    }
    while (!work.empty()) {
      std::string name = std::move(work.back());
      work.pop_back();
      for (const auto& ref : referenced_classes(classes.at(name), classes)) seed(ref);
    }

    struct ClassInfo {
      int id;
      std::string name;
    };
    std::vector<ClassInfo> infos;
    std::vector<const ClassInfo*> removable;
    for (const auto& [name, id] : classes)
      if (!closure.count(name)) infos.push_back({id, name});
    for (const auto& info : infos) removable.push_back(&info);
    remove_groups_in_dependency_order(removable, [&](const ClassInfo& c) {
      return referenced_classes(c.id, classes);
    });
  }

  // Attempt a joint deletion; keep it only when the error still reproduces.
  bool delete_if_sound(const std::vector<int>& ids) {
    DeletedMask saved = mask_;
    for (int id : ids) mask_[static_cast<std::size_t>(id)] = 1;
    if (check_(text()) == TestOutcome::Fail) return true;
    mask_ = std::move(saved);
    return false;
  }

  int subtree_end(int id) const { return subtree_end_[static_cast<std::size_t>(id)]; }

  // Variables read by a statement: initializer/right-hand-side/condition
  // identifiers; type names never count.
  std::set<std::string> reads_of(int stmt) const {
    using minikt::NodeKind;
    const auto& n = tree_->node(stmt);
    std::set<std::string> reads;
    switch (n.kind) {
      case NodeKind::PropertyDecl:
        for (int c : n.children)
          if (tree_->node(c).kind == NodeKind::Initializer) collect_idents(c, reads);
        break;
      case NodeKind::AssignStmt: {
        // right-hand side plus everything in the target except the written
        // root name itself (receivers of `a.b = e` still count as reads)
        int target = n.children[0];
        collect_idents(n.children[1], reads);
        collect_idents_after(target, tree_->node(target).first + 1, reads);
        break;
      }
      case NodeKind::IfStmt:
      case NodeKind::WhileStmt:
        for (int c : n.children)
          if (tree_->node(c).kind == NodeKind::Condition) collect_idents(c, reads);
        break;
      default:
        collect_idents(stmt, reads);
        break;
    }
    return reads;
  }

  // Variable a statement writes: the declared name or the assignment
  // target's root identifier.
  std::optional<std::string> writes_of(int stmt) const {
    using minikt::NodeKind;
    const auto& n = tree_->node(stmt);
    if (n.kind == NodeKind::PropertyDecl) return token_text(n.first + 1);
    if (n.kind == NodeKind::AssignStmt) {
      int target = n.children[0];
      for (int t = tree_->node(target).first; t < tree_->node(target).end; ++t)
        if (tree_->tokens()[static_cast<std::size_t>(t)].kind == minikt::TokenKind::Identifier)
          return tree_->tokens()[static_cast<std::size_t>(t)].text;
    }
    return std::nullopt;
  }

 private:
  bool depends_on(int stmt, const std::set<std::string>& deps, const std::set<int>& kept) const {
    using minikt::NodeKind;
    const auto& n = tree_->node(stmt);
    if (n.kind == NodeKind::IfStmt || n.kind == NodeKind::WhileStmt) {
      for (int id = stmt + 1; id < subtree_end(stmt); ++id)
        if (is_statement_kind(tree_->node(id).kind) && alive(id) && kept.count(id)) return true;
      return false;
    }
    auto written = writes_of(stmt);
    return written && deps.count(*written) > 0;
  }

  const std::string& token_text(int index) const {
    return tree_->tokens()[static_cast<std::size_t>(index)].text;
  }

  // Identifier tokens in the node's span, skipping type references.
  void collect_idents(int node, std::set<std::string>& out) const {
    collect_idents_after(node, tree_->node(node).first, out);
  }

  void collect_idents_after(int node, int from_token, std::set<std::string>& out) const {
    const auto& n = tree_->node(node);
    std::vector<char> excluded(static_cast<std::size_t>(n.end - n.first), 0);
    for (int id = node; id < subtree_end(node); ++id) {
      if (tree_->node(id).kind != minikt::NodeKind::TypeRef) continue;
      for (int t = tree_->node(id).first; t < tree_->node(id).end; ++t)
        excluded[static_cast<std::size_t>(t - n.first)] = 1;
    }
    for (int t = std::max(n.first, from_token); t < n.end; ++t) {
      const auto& tok = tree_->tokens()[static_cast<std::size_t>(t)];
      if (tok.kind == minikt::TokenKind::Identifier && !excluded[static_cast<std::size_t>(t - n.first)])
        out.insert(tok.text);
    }
  }

  // Directly called function keys, resolved within this file. Bare calls
  // prefer a method of the caller's own class, then a top-level function;
  // `recv.m()` resolves through the receiver's declared or constructed
  // type. Anything else is external.
  std::set<std::string> direct_callees(const FunInfo& caller,
                                       const std::vector<FunInfo>& funs) const {
    using minikt::NodeKind;
    auto declared = [&](const std::string& key) {
      return std::any_of(funs.begin(), funs.end(),
                         [&](const FunInfo& f) { return f.key == key; });
    };
    std::set<std::string> out;
    for (int id = caller.id; id < subtree_end(caller.id); ++id) {
      if (tree_->node(id).kind != NodeKind::PostfixExpr || !alive(id)) continue;
      std::vector<int> parts;
      for (int c : tree_->node(id).children)
        if (alive(c)) parts.push_back(c);
      for (std::size_t j = 1; j < parts.size(); ++j) {
        if (tree_->node(parts[j]).kind != NodeKind::CallSuffix) continue;
        if (j == 1 && tree_->node(parts[0]).kind == NodeKind::IdentExpr) {
          const std::string& name = token_text(tree_->node(parts[0]).first);
          if (!caller.clazz.empty() && declared(caller.clazz + "." + name))
            out.insert(caller.clazz + "." + name);
          else if (declared(name))
            out.insert(name);
        } else if (j == 2 && tree_->node(parts[1]).kind == NodeKind::MemberSuffix &&
                   tree_->node(parts[0]).kind == NodeKind::IdentExpr) {
          const std::string& recv = token_text(tree_->node(parts[0]).first);
          const std::string& method = token_text(tree_->node(parts[1]).first + 1);
          std::string type = type_of(recv, caller);
          if (!type.empty() && declared(type + "." + method)) out.insert(type + "." + method);
        }
      }
    }
    return out;
  }

  // Declared (or constructor-inferred) class type of a name visible from
  // `caller`: function locals and parameters first, then the enclosing
  // class's state, then file-level properties.
  std::string type_of(const std::string& name, const FunInfo& caller) const {
    using minikt::NodeKind;
    auto classes = declared_classes();

    auto decl_type = [&](int decl) -> std::string {
      const auto& d = tree_->node(decl);
      for (int c : d.children) {
        NodeKind k = tree_->node(c).kind;
        if (k == NodeKind::TypeRef) return token_text(tree_->node(c).first);
        if (k == NodeKind::TypeAnnot)
          for (int cc : tree_->node(c).children)
            if (tree_->node(cc).kind == NodeKind::TypeRef)
              return token_text(tree_->node(cc).first);
        if (k == NodeKind::Initializer && !tree_->node(c).children.empty()) {
          int expr = tree_->node(c).children[0];
          const auto& e = tree_->node(expr);
          if (e.kind == NodeKind::PostfixExpr && e.children.size() == 2 &&
              tree_->node(e.children[0]).kind == NodeKind::IdentExpr &&
              tree_->node(e.children[1]).kind == NodeKind::CallSuffix) {
            const std::string& ctor = token_text(tree_->node(e.children[0]).first);
            if (classes.count(ctor)) return ctor;
          }
        }
      }
      return "";
    };
    auto decl_name = [&](int decl) -> std::string {
      const auto& d = tree_->node(decl);
      if (d.kind == NodeKind::PropertyDecl) return token_text(d.first + 1);
      // Param: name first; CtorParam: optional val/var then name
      int t = d.first;
      if (token_text(t) == "val" || token_text(t) == "var") ++t;
      return token_text(t);
    };
    auto search = [&](int root, bool include_fun_params) -> std::string {
      if (root < 0) return "";
      for (int id = root; id < subtree_end(root); ++id) {
        if (!alive(id)) continue;
        NodeKind k = tree_->node(id).kind;
        bool candidate = k == NodeKind::PropertyDecl || k == NodeKind::CtorParam ||
                         (include_fun_params && k == NodeKind::Param);
        if (candidate && decl_name(id) == name) {
          std::string type = decl_type(id);
          if (!type.empty() && classes.count(type)) return type;
        }
      }
      return "";
    };

    std::string found = search(caller.id, true);
    if (found.empty()) {
      // class state: constructor parameters and directly declared
      // properties, never another method's locals
      int cls = enclosing(caller.id, NodeKind::ClassDecl);
      std::vector<int> decls;
      if (cls >= 0)
        for (int c : tree_->node(cls).children) {
          NodeKind k = tree_->node(c).kind;
          if (k == NodeKind::CtorParamList)
            for (int cc : tree_->node(c).children) decls.push_back(cc);
          if (k == NodeKind::ClassBody)
            for (int cc : tree_->node(c).children)
              if (tree_->node(cc).kind == NodeKind::PropertyDecl) decls.push_back(cc);
        }
      for (int c : tree_->node(tree_->root()).children)
        if (tree_->node(c).kind == NodeKind::PropertyDecl) decls.push_back(c);
      for (int d : decls) {
        if (!alive(d) || decl_name(d) != name) continue;
        std::string type = decl_type(d);
        if (!type.empty() && classes.count(type)) {
          found = type;
          break;
        }
      }
    }
    return found;
  }

  // Names of declared classes mentioned by live identifier tokens under
  // `node` (a deleted subtree mentions nothing).
  std::set<std::string> referenced_classes(int node,
                                           const std::map<std::string, int>& classes) const {
    std::set<std::string> refs;
    std::vector<char> dead(tree_->tokens().size(), 0);
    for (int id = 0; id < tree_->size(); ++id) {
      if (!mask_[static_cast<std::size_t>(id)]) continue;
      for (int t = tree_->node(id).first; t < tree_->node(id).end; ++t)
        dead[static_cast<std::size_t>(t)] = 1;
    }
    const auto& n = tree_->node(node);
    for (int t = n.first; t < n.end; ++t) {
      const auto& tok = tree_->tokens()[static_cast<std::size_t>(t)];
      if (tok.kind != minikt::TokenKind::Identifier || dead[static_cast<std::size_t>(t)]) continue;
      auto it = classes.find(tok.text);
      if (it != classes.end() && it->second != node) refs.insert(tok.text);
    }
    return refs;
  }

  // Shared removal driver for function- and class-level slicing: group the
  // removable declarations into dependency cycles, order groups so users
  // precede the things they use, and attempt each group as one deletion.
  template <typename Info, typename EdgesOf>
  void remove_groups_in_dependency_order(const std::vector<const Info*>& removable,
                                         const EdgesOf& edges_of) {
    if (removable.empty()) return;
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < removable.size(); ++i) index[key_of(*removable[i])] = static_cast<int>(i);

    std::vector<std::vector<int>> adj(removable.size());
    for (std::size_t i = 0; i < removable.size(); ++i)
      for (const auto& dep : edges_of(*removable[i])) {
        auto it = index.find(dep);
        if (it != index.end() && it->second != static_cast<int>(i))
          adj[i].push_back(it->second);
      }

    auto components = detail::strongly_connected(adj);
    std::reverse(components.begin(), components.end());  // users first
    for (const auto& comp : components) {
      std::vector<int> ids;
      for (int v : comp) ids.push_back(removable[static_cast<std::size_t>(v)]->id);
      delete_if_sound(ids);
    }
  }

  static const std::string& key_of(const FunInfo& f) { return f.key; }
  template <typename Info>
  static const std::string& key_of(const Info& c) {
    return c.name;
  }

  const minikt::SyntaxTree* tree_;
  SoundnessCheck check_;
  DeletedMask mask_;
  std::vector<int> subtree_end_;
};

// Innermost live statement covering the 1-based source line, or -1.
inline int statement_at_line(const minikt::SyntaxTree& tree, int line) {
  int best = -1;
  for (int id = 0; id < tree.size(); ++id) {
    if (!FileSlicer::is_statement_kind(tree.node(id).kind)) continue;
    if (tree.first_line(id) <= line && line <= tree.last_line(id)) best = id;
  }
  return best;  // larger preorder id == deeper or later == innermost cover
}

namespace detail {

inline void run_slices(FileSlicer& slicer, int criterion_stmt) {
  int fun = slicer.enclosing(criterion_stmt, minikt::NodeKind::FunDecl);
  if (fun >= 0) {
    slicer.slice_function(fun, criterion_stmt);
    slicer.slice_file_functions(fun);
  }
  slicer.slice_classes(criterion_stmt);
}

}  // namespace detail

// Pick the slicing criterion: the statement at the diagnostic's line when
// one is given, otherwise try every statement and keep the one whose slice
// ends up smallest (ties: earliest statement).
inline SliceCriterion choose_criterion(const minikt::SyntaxTree& tree, const std::string& file,
                                       std::optional<int> line, const SoundnessCheck& check) {
  SliceCriterion crit;
  crit.file = file;

  FileSlicer probe(tree, check);
  std::vector<int> candidates;
  for (const auto& fun : probe.declared_functions()) {
    auto stmts = probe.function_statements(fun.id);
    candidates.insert(candidates.end(), stmts.begin(), stmts.end());
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (candidates.empty()) return crit;  // nothing to slice from

  int chosen = -1;
  if (line) chosen = statement_at_line(tree, *line);
  if (chosen >= 0 && !std::count(candidates.begin(), candidates.end(), chosen)) chosen = -1;

  if (chosen < 0) {
    long best_tokens = 0;
    for (int candidate : candidates) {
      FileSlicer scratch(tree, check);
      detail::run_slices(scratch, candidate);
      long tokens = static_cast<long>(minikt::count_tokens(scratch.text()));
      if (chosen < 0 || tokens < best_tokens) {
        chosen = candidate;
        best_tokens = tokens;
      }
    }
  }

  FileSlicer naming(tree, check);
  int fun = naming.enclosing(chosen, minikt::NodeKind::FunDecl);
  if (fun >= 0) {
    auto funs = naming.declared_functions();
    for (const auto& f : funs)
      if (f.id == fun) {
        crit.function = f.key;
        crit.clazz = f.clazz;
      }
    auto stmts = naming.function_statements(fun);
    auto at = std::find(stmts.begin(), stmts.end(), chosen);
    crit.statement = static_cast<int>(at - stmts.begin());
  }
  return crit;
}

// Map a criterion back to the statement node it names, -1 if unresolvable.
inline int resolve_criterion(const minikt::SyntaxTree& tree, const SliceCriterion& crit) {
  if (crit.statement < 0 || crit.function.empty()) return -1;
  FileSlicer probe(tree, [](const std::string&) { return TestOutcome::Pass; });
  for (const auto& f : probe.declared_functions()) {
    if (f.key != crit.function) continue;
    auto stmts = probe.function_statements(f.id);
    if (crit.statement < static_cast<int>(stmts.size()))
      return stmts[static_cast<std::size_t>(crit.statement)];
  }
  return -1;
}

struct SliceOutcome {
  std::string text;
  bool changed = false;
  SliceCriterion criterion;
};

// Whole-file slicing entry point: choose a criterion, then slice at the
// statement, function, and class levels in that order.
inline SliceOutcome slice_file(const std::string& source, const std::string& file,
                               std::optional<int> line, const SoundnessCheck& check) {
  SliceOutcome outcome;
  outcome.text = source;

  auto parsed = minikt::parse(source);
  if (!parsed.ok()) return outcome;
  const auto& tree = *parsed.tree;

  outcome.criterion = choose_criterion(tree, file, line, check);
  int stmt = resolve_criterion(tree, outcome.criterion);
  if (stmt < 0) return outcome;

  if (check(source) != TestOutcome::Fail)
    throw std::invalid_argument("slice_file: original input does not fail");

  FileSlicer slicer(tree, check);
  detail::run_slices(slicer, stmt);
  if (slicer.anything_deleted()) {
    outcome.text = slicer.text();
    outcome.changed = true;
  }
  return outcome;
}

}  // namespace redukt
