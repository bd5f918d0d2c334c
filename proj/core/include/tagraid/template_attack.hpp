#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "tagraid/featurize.hpp"
#include "tagraid/graph.hpp"

namespace tagraid {

/// Fixed-shape (depth, fanout) neighbourhood tree in level order. The
/// children of position p are fanout*p + 1 ... fanout*p + fanout.
struct ComputationTree {
  static constexpr NodeId kPlaceholder = -1;

  NodeId root = 0;
  int depth = 0;
  int fanout = 0;
  std::vector<NodeId> slots;

  std::size_t positions() const noexcept { return slots.size(); }
  bool is_placeholder(std::size_t p) const { return slots[p] == kPlaceholder; }
  std::size_t parent(std::size_t p) const { return (p - 1) / static_cast<std::size_t>(fanout); }
  std::size_t first_child(std::size_t p) const { return static_cast<std::size_t>(fanout) * p + 1; }
  /// True when p lies on the last level (no children).
  bool is_leaf_level(std::size_t p) const { return first_child(p) >= slots.size(); }
  std::vector<std::size_t> placeholder_positions() const;

  bool operator==(const ComputationTree&) const = default;
};

/// Keeps a candidate child for a parent when it returns true.
using NeighborFilter = std::function<bool(NodeId parent, NodeId child)>;

struct TreeOptions {
  int depth = 2;
  int fanout = 3;
  /// With a reference graph, neighbours that are edges of the reference are
  /// sampled first and only the remaining slots go to other neighbours, so
  /// edges added by an attack land in former placeholder slots.
  bool original_first = true;

  bool operator==(const TreeOptions&) const = default;
};

/// Seeded level-by-level sampling without replacement; each position draws
/// from its own RNG stream derived from (seed, root, position), so trees of
/// different roots are independent. Missing children become placeholders
/// and children of a placeholder are placeholders.
ComputationTree build_tree(const TextAttributedGraph& graph, NodeId u, const TreeOptions& opts,
                           std::uint64_t seed, const TextAttributedGraph* reference = nullptr,
                           const NeighborFilter& filter = {});

ComputationTree build_tree(const TextAttributedGraph& graph, NodeId u, int d, int k, std::uint64_t seed);

enum class InjectionStrategy : std::uint8_t { NI, SI, MSI };

std::string_view to_string(InjectionStrategy s);
InjectionStrategy injection_strategy_from(std::string_view name);

struct InjectionPlan {
  InjectionStrategy strategy = InjectionStrategy::NI;
  NodeId target = 0;
  std::vector<EdgeFlip> new_edges;
  std::map<std::size_t, NodeId> filled_positions;
  /// Number of requested injections that could not be filled.
  std::size_t shortfall = 0;

  bool operator==(const InjectionPlan&) const = default;
};

/// Placeholders that can receive an injected node: those whose parent slot
/// holds a real node (the injected node is wired to that node).
std::vector<std::size_t> attachable_placeholders(const ComputationTree& tree);

/// Degree ranking used by SI and MSI: degree descending, id ascending.
std::vector<NodeId> degree_ranked(const TextAttributedGraph& graph, std::span<const NodeId> pool);

/// Builds the injection plan for one target. NI samples from the
/// non-adjacent pool (seeded); SI wires the top-ranked node to the first
/// attachable placeholder; MSI wires distinct top-ranked nodes in order.
/// Degrees come from `graph`, which should be the unattacked graph.
InjectionPlan inject(const TextAttributedGraph& graph, NodeId u, const ComputationTree& tree,
                     InjectionStrategy strategy, std::uint64_t seed);

/// Union of the plans' edges in target-id order, skipping edges that are
/// already present or already added by an earlier plan.
std::vector<EdgeFlip> merge_plans(const TextAttributedGraph& graph, std::span<const InjectionPlan> plans);

/// Projector input for one tree: per position the node embedding (or the
/// placeholder embedding) plus pe_weight times the position's Laplacian PE
/// row, concatenated in level order.
Vector node_sequence(const ComputationTree& tree, const FeatureMatrix& features, const Vector& placeholder,
                     const Matrix& pe, double pe_weight);

}  // namespace tagraid
