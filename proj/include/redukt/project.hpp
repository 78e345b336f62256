#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "redukt/minikt/lexer.hpp"
#include "redukt/minikt/parser.hpp"
#include "redukt/transforms.hpp"

namespace redukt {

// Where the reduction anchors: the file the compiler blamed (or the user
// named) and, when the diagnostic was precise, the exact line and column.
struct ReductionCriterion {
  enum class Source { Extracted, UserSpecified };

  std::string file;
  std::optional<std::pair<int, int>> location;  // (line, col); extracted only
  Source source = Source::UserSpecified;

  static ReductionCriterion extracted(std::string file, int line, int col) {
    ReductionCriterion rc;
    rc.file = std::move(file);
    rc.location = {line, col};
    rc.source = Source::Extracted;
    return rc;
  }
  static ReductionCriterion user(std::string file) {
    ReductionCriterion rc;
    rc.file = std::move(file);
    rc.source = Source::UserSpecified;
    return rc;
  }
};

// The unit of reduction: an ordered set of source files plus the criterion.
// Paths are unique and the criterion file must be one of them.
struct Project {
  FileSet files;
  ReductionCriterion rc;
};

inline std::size_t rc_index(const Project& project) {
  for (std::size_t i = 0; i < project.files.size(); ++i)
    if (project.files[i].first == project.rc.file) return i;
  throw std::invalid_argument("criterion file not in project: " + project.rc.file);
}

inline int project_tokens(const Project& project) {
  int total = 0;
  for (const auto& [path, text] : project.files) total += minikt::count_tokens(text);
  return total;
}

// Files connected to the criterion file through imports and qualified-name
// references, in both directions: what the criterion's file pulls in, and
// every file that mentions something it declares.
struct DependencyTree {
  std::string root;
  std::vector<std::string> nodes;  // the closure, in project file order
  std::map<std::string, std::vector<std::string>> uses;     // file -> referenced files
  std::map<std::string, std::vector<std::string>> used_by;  // reverse edges

  bool contains(const std::string& path) const {
    return std::find(nodes.begin(), nodes.end(), path) != nodes.end();
  }
};

namespace project_detail {

// Names a file offers to the rest of the project: identifiers of top-level
// fun/class/val/var declarations, found by a brace-depth token scan so even
// files that no longer parse keep advertising what they declare.
inline std::vector<std::string> declared_names(const std::string& text) {
  auto tokens = minikt::lex(text);
  std::vector<std::string> names;
  int depth = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (t.kind == minikt::TokenKind::Punct) {
      if (t.text == "{") ++depth;
      if (t.text == "}") --depth;
      continue;
    }
    if (depth != 0 || t.kind != minikt::TokenKind::Keyword) continue;
    if (t.text != "fun" && t.text != "class" && t.text != "val" && t.text != "var") continue;
    if (i + 1 < tokens.size() && tokens[i + 1].kind == minikt::TokenKind::Identifier)
      names.push_back(tokens[i + 1].text);
  }
  return names;
}

// Names a file mentions: the final segment of every import path, plus any
// identifier that is not itself a declaration name. Matching against other
// files' declarations is purely lexical; there is no resolver.
struct References {
  std::vector<std::string> imports;  // last path segment of each import
  std::vector<std::string> idents;   // every other candidate reference
};

inline References referenced_names(const std::string& text) {
  auto tokens = minikt::lex(text);
  References refs;
  std::size_t i = 0;
  auto is_kw = [&](std::size_t j, const char* w) {
    return tokens[j].kind == minikt::TokenKind::Keyword && tokens[j].text == w;
  };
  while (i < tokens.size()) {
    const auto& t = tokens[i];
    if (is_kw(i, "import")) {
      std::string last;
      ++i;
      while (i < tokens.size() &&
             (tokens[i].kind == minikt::TokenKind::Identifier || tokens[i].text == ".")) {
        if (tokens[i].kind == minikt::TokenKind::Identifier) last = tokens[i].text;
        ++i;
      }
      if (!last.empty()) refs.imports.push_back(last);
      continue;
    }
    if (t.kind == minikt::TokenKind::Identifier) {
      bool is_decl_name =
          i > 0 && tokens[i - 1].kind == minikt::TokenKind::Keyword &&
          (tokens[i - 1].text == "fun" || tokens[i - 1].text == "class" ||
           tokens[i - 1].text == "val" || tokens[i - 1].text == "var");
      if (!is_decl_name) refs.idents.push_back(t.text);
    }
    ++i;
  }
  return refs;
}

inline std::string stem_of(const std::string& path) {
  std::size_t slash = path.find_last_of('/');
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  std::size_t dot = base.find_last_of('.');
  return dot == std::string::npos ? base : base.substr(0, dot);
}

}  // namespace project_detail

// Transitive closure of import/name references around the criterion file.
// A file that fails to parse contributes no outgoing edges of its own; it
// joins the tree only if some other file textually refers to it.
inline DependencyTree build_dependency_tree(const Project& project) {
  rc_index(project);  // validates the criterion file is present
  const auto& files = project.files;

  // name -> files declaring it (plus file stems, so imports can reach files
  // whose contents advertise nothing usable)
  std::map<std::string, std::vector<std::size_t>> declares;
  std::map<std::string, std::vector<std::size_t>> stems;
  for (std::size_t i = 0; i < files.size(); ++i) {
    for (auto& n : project_detail::declared_names(files[i].second)) declares[n].push_back(i);
    stems[project_detail::stem_of(files[i].first)].push_back(i);
  }

  std::vector<std::set<std::size_t>> fwd(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!minikt::parse(files[i].second).ok()) continue;
    auto refs = project_detail::referenced_names(files[i].second);
    auto link = [&](const std::string& name, bool match_stems) {
      if (auto it = declares.find(name); it != declares.end())
        for (std::size_t j : it->second)
          if (j != i) fwd[i].insert(j);
      if (!match_stems) return;
      if (auto it = stems.find(name); it != stems.end())
        for (std::size_t j : it->second)
          if (j != i) fwd[i].insert(j);
    };
    for (auto& n : refs.imports) link(n, true);
    for (auto& n : refs.idents) link(n, false);
  }

  // closure over the union of forward and reverse edges
  std::vector<char> in_tree(files.size(), 0);
  std::vector<std::size_t> queue{rc_index(project)};
  in_tree[queue[0]] = 1;
  while (!queue.empty()) {
    std::size_t at = queue.back();
    queue.pop_back();
    for (std::size_t i = 0; i < files.size(); ++i) {
      if (in_tree[i]) continue;
      if (fwd[at].count(i) || fwd[i].count(at)) {
        in_tree[i] = 1;
        queue.push_back(i);
      }
    }
  }

  DependencyTree tree;
  tree.root = project.rc.file;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!in_tree[i]) continue;
    tree.nodes.push_back(files[i].first);
    auto& out = tree.uses[files[i].first];
    for (std::size_t j : fwd[i]) {
      if (!in_tree[j]) continue;
      out.push_back(files[j].first);
      tree.used_by[files[j].first].push_back(files[i].first);
    }
  }
  return tree;
}

// Drop every file outside the tree in one batch; if the batch kills the
// error, put files back one at a time until it fails again.
inline Project prune_unreferenced(Project project, const DependencyTree& tree,
                                  const FileSetCheck& check) {
  const auto& files = project.files;
  std::vector<char> keep(files.size(), 0);
  std::vector<std::size_t> removed;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (tree.contains(files[i].first) || files[i].first == project.rc.file)
      keep[i] = 1;
    else
      removed.push_back(i);
  }
  if (removed.empty()) return project;

  auto masked = [&] {
    FileSet out;
    for (std::size_t i = 0; i < files.size(); ++i)
      if (keep[i]) out.push_back(files[i]);
    return out;
  };

  if (check(masked()) != TestOutcome::Fail) {
    for (std::size_t i : removed) {
      keep[i] = 1;
      if (check(masked()) == TestOutcome::Fail) break;
    }
  }
  project.files = masked();
  return project;
}

// The per-file toolkit for the project pass: every transformation that works
// without knowing the reduction criterion.
inline std::vector<Transformation> project_safe_transforms(const TransformOptions& options = {}) {
  std::vector<Transformation> out;
  for (auto& t : text_transforms(options))
    if (t.project_safe) out.push_back(std::move(t));
  for (auto& t : tree_transforms(options))
    if (t.project_safe) out.push_back(std::move(t));
  return out;
}

namespace project_detail {

// Per-file reduction worker: sweeps the project-safe catalog to a fixpoint,
// judging each candidate as the whole file set with only this file swapped.
inline std::string reduce_file(const FileSet& base, std::size_t index,
                               const std::vector<Transformation>& transforms,
                               const FileSetCheck& check) {
  std::string text = base[index].second;
  auto file_check = [&](const std::string& candidate) {
    FileSet trial = base;
    trial[index].second = candidate;
    return check(trial);
  };
  for (int round = 0; round < 8; ++round) {
    std::string before = text;
    for (const auto& t : transforms) text = run_to_fixpoint(t, std::move(text), file_check);
    if (text == before) break;
  }
  return text;
}

// Bottom-up processing order: deepest files in the dependency tree first,
// ties in project file order, the criterion file (the root) last. Files that
// somehow sit outside the tree go first; they cannot affect anything below.
inline std::vector<std::vector<std::size_t>> depth_groups(const Project& project,
                                                          const DependencyTree& tree) {
  const auto& files = project.files;
  std::map<std::string, int> depth;
  std::vector<std::string> frontier{tree.root};
  depth[tree.root] = 0;
  while (!frontier.empty()) {
    std::vector<std::string> next;
    for (const auto& at : frontier) {
      auto visit = [&](const std::vector<std::string>& neighbours) {
        for (const auto& n : neighbours)
          if (!depth.count(n)) {
            depth[n] = depth[at] + 1;
            next.push_back(n);
          }
      };
      if (auto it = tree.uses.find(at); it != tree.uses.end()) visit(it->second);
      if (auto it = tree.used_by.find(at); it != tree.used_by.end()) visit(it->second);
    }
    frontier = std::move(next);
  }

  int deepest = 0;
  for (auto& [path, d] : depth) deepest = std::max(deepest, d);
  auto depth_of = [&](const std::string& path) {
    auto it = depth.find(path);
    return it == depth.end() ? deepest + 1 : it->second;
  };

  std::vector<std::vector<std::size_t>> groups;
  for (int d = deepest + 1; d >= 0; --d) {
    std::vector<std::size_t> group;
    for (std::size_t i = 0; i < files.size(); ++i)
      if (depth_of(files[i].first) == d) group.push_back(i);
    if (!group.empty()) groups.push_back(std::move(group));
  }
  return groups;
}

}  // namespace project_detail

// One bottom-up sweep over the project. Every file is reduced with the
// criterion-free transformations against a snapshot of the pass start, files
// at the same tree depth concurrently when jobs > 1; results merge at a
// barrier and one joint check accepts them. If the joint check does not fail
// (cross-file edits can in principle interfere), the pass re-runs the files
// sequentially against the evolving project, which is sound by construction.
// The check callback must tolerate concurrent calls when jobs > 1.
inline Project project_pass(Project project, const DependencyTree& tree, const FileSetCheck& check,
                            int jobs = 1, const TransformOptions& options = {}) {
  rc_index(project);
  const auto transforms = project_safe_transforms(options);
  const auto groups = project_detail::depth_groups(project, tree);
  const FileSet snapshot = project.files;

  std::vector<std::string> reduced(snapshot.size());
  for (std::size_t i = 0; i < snapshot.size(); ++i) reduced[i] = snapshot[i].second;

  for (const auto& group : groups) {
    int workers = std::max(1, std::min<int>(jobs, static_cast<int>(group.size())));
    if (workers == 1) {
      for (std::size_t i : group)
        reduced[i] = project_detail::reduce_file(snapshot, i, transforms, check);
      continue;
    }
    std::atomic<std::size_t> cursor{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t at = cursor++; at < group.size(); at = cursor++) {
            std::size_t i = group[at];
            reduced[i] = project_detail::reduce_file(snapshot, i, transforms, check);
          }
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);  // a broken worker aborts the pass
  }

  FileSet merged = snapshot;
  bool changed = false;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    if (merged[i].second != reduced[i]) changed = true;
    merged[i].second = reduced[i];
  }
  if (!changed) return project;

  if (check(merged) == TestOutcome::Fail) {
    project.files = std::move(merged);
    return project;
  }

  FileSet current = snapshot;
  for (const auto& group : groups)
    for (std::size_t i : group)
      current[i].second = project_detail::reduce_file(current, i, transforms, check);
  project.files = std::move(current);
  return project;
}

}  // namespace redukt
