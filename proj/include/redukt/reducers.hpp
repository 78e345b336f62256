#pragma once

#include <algorithm>
#include <functional>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

#include "redukt/minikt/syntax.hpp"

namespace redukt {

enum class TestOutcome {
  Fail,  // the error still reproduces — the interesting outcome
  Pass,  // anything else: clean run, other error, rejected input
};

// Judges a whole-file rewrite: FAIL = the original error still reproduces.
using SoundnessCheck = std::function<TestOutcome(const std::string&)>;

template <typename Item>
using ListTest = std::function<TestOutcome(const std::vector<Item>&)>;

// Classic delta debugging:
//
//   DD(T) = DD2(T, 2)
//   DD2(T, n) = DD2(Δi, 2)             if test(Δi) fails
//             | DD2(∇i, max(n-1, 2))   if test(∇i = T - Δi) fails
//             | DD2(T, min(|T|, 2n))   if n < |T|
//             | T                      otherwise
//
// Chunks are as even as possible, the remainder spread over the leading
// chunks. The result is 1-minimal: removing any single element makes the
// test pass. A singleton input is returned as-is (the recurrence cannot
// split it, and the empty input is never considered).
template <typename Item>
std::vector<Item> ddmin(std::vector<Item> items, const ListTest<Item>& test) {
  if (test(items) != TestOutcome::Fail)
    throw std::invalid_argument("ddmin: initial input does not fail");

  std::size_t n = 2;
  while (items.size() >= 2 && n <= items.size()) {
    // partition into n chunks, sizes |T|/n rounded up for the first |T|%n
    std::vector<std::vector<Item>> chunks(n);
    const std::size_t base = items.size() / n, rem = items.size() % n;
    std::size_t at = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t len = base + (i < rem ? 1 : 0);
      chunks[i].assign(items.begin() + at, items.begin() + at + len);
      at += len;
    }

    bool reduced = false;
    for (std::size_t i = 0; i < n && !reduced; ++i) {
      if (test(chunks[i]) == TestOutcome::Fail) {
        items = std::move(chunks[i]);
        n = 2;
        reduced = true;
      }
    }
    if (reduced) continue;

    for (std::size_t i = 0; i < n && !reduced; ++i) {
      std::vector<Item> complement;
      complement.reserve(items.size() - chunks[i].size());
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) complement.insert(complement.end(), chunks[j].begin(), chunks[j].end());
      if (test(complement) == TestOutcome::Fail) {
        items = std::move(complement);
        n = std::max<std::size_t>(n - 1, 2);
        reduced = true;
      }
    }
    if (reduced) continue;

    if (n < items.size()) {
      n = std::min(items.size(), 2 * n);
      continue;
    }
    break;  // n == |T| and nothing smaller fails: 1-minimal
  }
  return items;
}

// A plain rooted tree with per-node token weights and deletability flags,
// the common substrate for hdd and pardis. Node 0 is the root; ids are in
// preorder (every parent precedes its children), which doubles as source
// order for syntax trees.
struct TreeModel {
  struct Node {
    int parent = -1;
    int weight = 0;  // tokens owned by this node alone, not its subtree
    bool deletable = false;
    std::vector<int> children;
  };
  std::vector<Node> nodes;

  std::vector<int> depths() const {
    std::vector<int> d(nodes.size(), 0);
    for (std::size_t i = 1; i < nodes.size(); ++i) d[i] = d[nodes[i].parent] + 1;
    return d;
  }

  // Total token weight rooted at each node.
  std::vector<long> subtree_weights() const {
    std::vector<long> w(nodes.size(), 0);
    for (std::size_t i = nodes.size(); i-- > 0;) {
      w[i] += nodes[i].weight;
      if (nodes[i].parent >= 0) w[nodes[i].parent] += w[i];
    }
    return w;
  }

  static TreeModel from_parents(const std::vector<int>& parents, const std::vector<int>& weights,
                                const std::vector<char>& deletable) {
    TreeModel m;
    m.nodes.resize(parents.size());
    for (std::size_t i = 0; i < parents.size(); ++i) {
      m.nodes[i].parent = parents[i];
      m.nodes[i].weight = weights[i];
      m.nodes[i].deletable = deletable[i] != 0;
      if (parents[i] >= 0) m.nodes[parents[i]].children.push_back(static_cast<int>(i));
    }
    return m;
  }
};

// deleted[id] marks the whole subtree rooted at id as removed
using DeletedMask = std::vector<char>;
using TreeTest = std::function<TestOutcome(const DeletedMask&)>;

inline std::vector<char> alive_nodes(const TreeModel& model, const DeletedMask& deleted) {
  std::vector<char> alive(model.nodes.size(), 0);
  if (model.nodes.empty()) return alive;
  for (std::size_t i = 0; i < model.nodes.size(); ++i) {
    int parent = model.nodes[i].parent;
    bool parent_alive = parent < 0 || alive[parent];
    alive[i] = parent_alive && !deleted[i];
  }
  return alive;
}

inline long alive_tokens(const TreeModel& model, const DeletedMask& deleted) {
  auto alive = alive_nodes(model, deleted);
  long total = 0;
  for (std::size_t i = 0; i < model.nodes.size(); ++i)
    if (alive[i]) total += model.nodes[i].weight;
  return total;
}

// Hierarchical delta debugging: walk the tree level by level from the root;
// at each level run delta debugging over the deletable live nodes to find
// the minimal configuration to keep, commit it, and descend. Deleting every
// deletable node of a level is probed first — the plain recurrence cannot
// reach the empty configuration on its own.
inline DeletedMask hdd(const TreeModel& model, const TreeTest& test) {
  DeletedMask deleted(model.nodes.size(), 0);
  if (test(deleted) != TestOutcome::Fail)
    throw std::invalid_argument("hdd: initial input does not fail");

  const auto depth = model.depths();
  for (int level = 0;; ++level) {
    auto alive = alive_nodes(model, deleted);
    std::vector<int> level_nodes, candidates;
    for (std::size_t i = 0; i < model.nodes.size(); ++i) {
      if (!alive[i] || depth[i] != level) continue;
      level_nodes.push_back(static_cast<int>(i));
      if (model.nodes[i].deletable) candidates.push_back(static_cast<int>(i));
    }
    if (level_nodes.empty()) break;
    if (candidates.empty()) continue;

    DeletedMask all_gone = deleted;
    for (int id : candidates) all_gone[id] = 1;
    if (test(all_gone) == TestOutcome::Fail) {
      deleted = std::move(all_gone);
      continue;
    }

    ListTest<int> level_test = [&](const std::vector<int>& kept) {
      DeletedMask trial = deleted;
      for (int id : candidates) trial[id] = 1;
      for (int id : kept) trial[id] = 0;
      return test(trial);
    };
    std::vector<int> kept = ddmin(candidates, level_test);
    DeletedMask next = deleted;
    for (int id : candidates) next[id] = 1;
    for (int id : kept) next[id] = 0;
    deleted = std::move(next);
  }
  return deleted;
}

// Priority-driven reduction: greedily try to delete the heaviest subtrees
// first. A successful deletion is committed and its subtree never revisited;
// a failed attempt is reverted and the node's children are enqueued.
inline DeletedMask pardis(const TreeModel& model, const TreeTest& test) {
  DeletedMask deleted(model.nodes.size(), 0);
  if (test(deleted) != TestOutcome::Fail)
    throw std::invalid_argument("pardis: initial input does not fail");
  if (model.nodes.empty()) return deleted;

  const auto weights = model.subtree_weights();
  // heaviest first; ties in source (preorder) order
  auto lighter = [&](int a, int b) {
    if (weights[a] != weights[b]) return weights[a] < weights[b];
    return a > b;
  };
  std::priority_queue<int, std::vector<int>, decltype(lighter)> queue(lighter);
  queue.push(0);

  while (!queue.empty()) {
    int id = queue.top();
    queue.pop();
    if (model.nodes[id].deletable) {
      deleted[id] = 1;
      if (test(deleted) == TestOutcome::Fail) continue;  // committed, subtree done
      deleted[id] = 0;
    }
    for (int child : model.nodes[id].children) queue.push(child);
  }
  return deleted;
}

// Bridges a parsed file into the generic tree reducers. Node ids match the
// syntax tree's; weights are redistributed from subtree totals to per-node
// ownership.
inline TreeModel tree_model_from(const minikt::SyntaxTree& tree) {
  TreeModel m;
  m.nodes.resize(static_cast<std::size_t>(tree.size()));
  for (int i = 0; i < tree.size(); ++i) {
    const auto& n = tree.node(i);
    auto& out = m.nodes[static_cast<std::size_t>(i)];
    out.parent = n.parent;
    out.deletable = n.deletable;
    int own = n.weight;
    for (int child : n.children) own -= tree.node(child).weight;
    out.weight = own;
    out.children = n.children;
  }
  return m;
}

}  // namespace redukt
