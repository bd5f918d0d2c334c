#pragma once

#include <string>
#include <vector>

#include "tagraid/graph.hpp"
#include "tagraid/rng.hpp"

namespace tagraid::testing {

inline std::vector<std::string> word_texts(std::size_t n) {
  static const char* words[] = {"graph", "neural", "text", "model", "attack", "learning", "node", "robust",
                                "language", "vector", "sparse", "kernel", "tree", "token", "layer", "signal"};
  std::vector<std::string> texts;
  for (std::size_t i = 0; i < n; ++i) {
    texts.push_back(std::string(words[i % 16]) + " " + words[(i * 7 + 3) % 16] + " " + words[(i * 5 + 1) % 16] +
                    " paper " + std::to_string(i));
  }
  return texts;
}

// T5: edges 0-1, 1-2, 2-3, 3-4, 1-3.
inline TextAttributedGraph t5() {
  return TextAttributedGraph(word_texts(5), {0, 0, 1, 1, 0}, 2, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {1, 3}});
}

inline TextAttributedGraph path3() {
  return TextAttributedGraph(word_texts(3), {0, 1, 0}, 2, {{0, 1}, {1, 2}});
}

inline TextAttributedGraph complete(int n) {
  std::vector<Edge> edges;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) edges.push_back({a, b});
  return TextAttributedGraph(word_texts(static_cast<std::size_t>(n)), std::vector<int>(static_cast<std::size_t>(n), 0),
                             1, edges);
}

// Seeded random graph with roughly homophilous labels and class-flavoured texts.
inline TextAttributedGraph random_graph(std::size_t n, std::size_t m, int classes, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> labels(n);
  for (auto& l : labels) l = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
  static const char* topic[] = {"alpha beta gamma", "delta epsilon zeta", "eta theta iota", "kappa lambda mu"};
  std::vector<std::string> texts(n);
  for (std::size_t i = 0; i < n; ++i) {
    texts[i] = std::string(topic[labels[i] % 4]) + " item " + std::to_string(i) + " note " +
               std::to_string(rng.below(50));
  }
  std::vector<Edge> edges;
  std::size_t guard = 0;
  while (edges.size() < m && guard++ < m * 50) {
    const auto a = static_cast<NodeId>(rng.below(n));
    const auto b = static_cast<NodeId>(rng.below(n));
    if (a == b) continue;
    if (labels[static_cast<std::size_t>(a)] != labels[static_cast<std::size_t>(b)] && rng.uniform() < 0.6) continue;
    const Edge e = make_edge(a, b);
    bool dup = false;
    for (const auto& x : edges) dup = dup || x == e;
    if (!dup) edges.push_back(e);
  }
  return TextAttributedGraph(std::move(texts), std::move(labels), classes, std::move(edges));
}

}  // namespace tagraid::testing
