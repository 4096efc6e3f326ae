#pragma once

#include <cstdint>
#include <queue>
#include <utility>
#include <vector>

#include "mmgram/common.hpp"
#include "mmgram/corpus.hpp"

namespace mmgram {

/// Huffman coding of the vocabulary. codes[w] holds the branch directions
/// root->leaf (0/1) and paths[w] the inner-node indices visited, same length.
/// Convention: bit 0 contributes log sigma(+x), bit 1 contributes
/// log sigma(-x), x = <inner_vector, u>.
struct HuffmanTree {
  std::vector<std::vector<std::uint8_t>> codes;
  std::vector<std::vector<int>> paths;
  int inner_count = 0;

  int vocab_size() const { return static_cast<int>(codes.size()); }
};

/// Deterministic Huffman construction: min-heap ordered by (count, creation
/// id), leaves created first in vocabulary order, merged nodes after.
inline HuffmanTree build_huffman(const std::vector<std::int64_t>& counts) {
  const int V = static_cast<int>(counts.size());
  if (V == 0) throw std::runtime_error("build_huffman: empty vocabulary");

  HuffmanTree tree;
  tree.codes.resize(V);
  tree.paths.resize(V);
  if (V == 1) return tree;  // single leaf, zero-length code, p = 1

  struct Node {
    std::int64_t count;
    int id;  // creation order; leaves 0..V-1, merges V..2V-2
  };
  auto cmp = [](const Node& a, const Node& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.id > b.id;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(cmp)> heap(cmp);

  const int total_nodes = 2 * V - 1;
  std::vector<int> parent(total_nodes, -1);
  std::vector<std::uint8_t> branch(total_nodes, 0);
  for (int i = 0; i < V; ++i) heap.push({counts[i], i});

  int next_id = V;
  while (heap.size() > 1) {
    Node a = heap.top();
    heap.pop();
    Node b = heap.top();
    heap.pop();
    parent[a.id] = next_id;
    branch[a.id] = 0;
    parent[b.id] = next_id;
    branch[b.id] = 1;
    heap.push({a.count + b.count, next_id});
    ++next_id;
  }
  tree.inner_count = V - 1;

  for (int w = 0; w < V; ++w) {
    std::vector<std::uint8_t> code;
    std::vector<int> path;
    for (int n = w; parent[n] != -1; n = parent[n]) {
      code.push_back(branch[n]);
      path.push_back(parent[n] - V);  // inner-node index 0..V-2
    }
    // collected leaf->root, store root->leaf
    tree.codes[w].assign(code.rbegin(), code.rend());
    tree.paths[w].assign(path.rbegin(), path.rend());
  }
  return tree;
}

/// log p(word | u) under the hierarchical softmax:
/// sum over path nodes of log sigma(+-<u'_n, u>).
inline double hs_log_prob(const HuffmanTree& tree, const Matrix& inner,
                          std::span<const double> u, int word) {
  const auto& code = tree.codes[word];
  const auto& path = tree.paths[word];
  double lp = 0.0;
  for (std::size_t i = 0; i < code.size(); ++i) {
    double x = dot(inner.row(path[i]), u);
    lp += log_sigmoid(code[i] == 0 ? x : -x);
  }
  return lp;
}

struct HsGradients {
  std::vector<double> grad_target;  // d log p / d u
  // (inner-node index, gradient) pairs; nodes off the path get exactly zero
  std::vector<std::pair<int, std::vector<double>>> grad_nodes;
};

inline HsGradients hs_gradients(const HuffmanTree& tree, const Matrix& inner,
                                std::span<const double> u, int word) {
  const auto& code = tree.codes[word];
  const auto& path = tree.paths[word];
  HsGradients g;
  g.grad_target.assign(u.size(), 0.0);
  g.grad_nodes.reserve(code.size());
  for (std::size_t i = 0; i < code.size(); ++i) {
    auto un = inner.row(path[i]);
    double x = dot(un, u);
    double s = code[i] == 0 ? 1.0 : -1.0;
    double coef = s * sigmoid(-s * x);  // d/dx log sigma(s x)
    axpy(coef, un, g.grad_target);
    std::vector<double> gn(u.size());
    for (std::size_t d = 0; d < u.size(); ++d) gn[d] = coef * u[d];
    g.grad_nodes.emplace_back(path[i], std::move(gn));
  }
  return g;
}

}  // namespace mmgram
