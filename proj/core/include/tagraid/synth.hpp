#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tagraid/graph.hpp"

namespace tagraid {

/// Shape of a synthetic citation-style dataset: class sizes, exact edge
/// count, label homophily and text statistics.
struct SynthProfile {
  std::string name;
  std::vector<std::string> class_names;
  std::vector<std::size_t> class_sizes;
  std::size_t edges = 0;
  double homophily = 0.8;
  /// Pareto tail index of the node attachment weights.
  double weight_tail = 2.2;
  std::size_t abstract_words = 90;
  /// Range of the per-node share of topic words drawn from the node's class.
  double topic_min = 0.06;
  double topic_max = 0.30;
  /// Share of words drawn from one other class (a node's secondary topic).
  double cross_topic = 0.06;
  std::size_t topic_vocab = 80;
  std::size_t shared_vocab = 400;

  std::size_t nodes() const noexcept;
};

SynthProfile cora_like();
SynthProfile citeseer_like();
SynthProfile pubmed_like();
/// Looks up "cora-like", "citeseer-like" or "pubmed-like".
SynthProfile synth_profile(const std::string& name);

/// Seeded graph with exactly profile.edges unique undirected edges, every
/// node of degree >= 1 and paper-like "Title: ... Abstract: ..." texts whose
/// words mix a class vocabulary with a shared one.
TextAttributedGraph generate_synthetic(const SynthProfile& profile, std::uint64_t seed);

}  // namespace tagraid
