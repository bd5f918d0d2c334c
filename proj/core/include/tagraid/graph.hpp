#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tagraid {

using NodeId = std::int32_t;

enum class SplitTag : std::uint8_t { None, Train, Val, Test };

std::string_view to_string(SplitTag tag);

/// Undirected edge stored canonically with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  auto operator<=>(const Edge&) const = default;
};

Edge make_edge(NodeId a, NodeId b) noexcept;

enum class FlipOp : std::uint8_t { Add, Remove };

std::string_view to_string(FlipOp op);

/// Add or remove one undirected edge. Ordering is lexicographic (u, v, op)
/// on the canonical form, which is the tie-break used by every attack.
struct EdgeFlip {
  NodeId u = 0;
  NodeId v = 0;
  FlipOp op = FlipOp::Add;

  EdgeFlip canonical() const noexcept;
  EdgeFlip inverse() const noexcept;
  auto operator<=>(const EdgeFlip&) const = default;
};

/// Immutable text-attributed graph. Node payloads (texts, labels, ids) are
/// shared between graphs derived from one another, so structural edits are
/// cheap and graphs are safe to share across threads.
class TextAttributedGraph {
 public:
  TextAttributedGraph() = default;

  /// Validates and builds a graph. Edges may arrive in any orientation and
  /// with duplicates; self loops and out-of-range endpoints throw InputError.
  TextAttributedGraph(std::vector<std::string> texts, std::vector<int> labels, int num_classes,
                      std::vector<Edge> edges, std::vector<SplitTag> split = {},
                      std::vector<std::string> external_ids = {},
                      std::vector<std::string> class_names = {});

  std::size_t node_count() const noexcept { return labels_ ? labels_->size() : 0; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  int num_classes() const noexcept { return num_classes_; }

  const std::string& text(NodeId u) const { return (*texts_)[static_cast<std::size_t>(u)]; }
  const std::vector<std::string>& texts() const noexcept { return *texts_; }
  int label(NodeId u) const { return (*labels_)[static_cast<std::size_t>(u)]; }
  const std::vector<int>& labels() const noexcept { return *labels_; }
  SplitTag split(NodeId u) const { return split_[static_cast<std::size_t>(u)]; }
  const std::vector<SplitTag>& splits() const noexcept { return split_; }
  const std::vector<std::string>& external_ids() const noexcept { return *ids_; }
  const std::vector<std::string>& class_names() const noexcept { return *class_names_; }

  /// Sorted canonical edge list.
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  /// Sorted neighbour ids of u.
  std::span<const NodeId> neighbors(NodeId u) const;
  std::size_t degree(NodeId u) const;
  bool has_edge(NodeId a, NodeId b) const;
  bool valid(NodeId u) const noexcept { return u >= 0 && static_cast<std::size_t>(u) < node_count(); }

  std::vector<NodeId> nodes_with(SplitTag tag) const;
  double mean_text_length() const;

  TextAttributedGraph with_edges(std::vector<Edge> edges) const;
  TextAttributedGraph with_texts(std::vector<std::string> texts) const;
  TextAttributedGraph with_split(std::vector<SplitTag> split) const;

  /// Graph equality by content (texts, labels, split, edge set).
  bool same_content(const TextAttributedGraph& other) const;

 private:
  void build_adjacency();

  std::shared_ptr<const std::vector<std::string>> texts_;
  std::shared_ptr<const std::vector<int>> labels_;
  std::shared_ptr<const std::vector<std::string>> ids_;
  std::shared_ptr<const std::vector<std::string>> class_names_;
  int num_classes_ = 0;
  std::vector<SplitTag> split_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> adjacency_;
};

/// Applies flips in order. Throws InputError naming the first invalid flip
/// (Add of an existing edge, Remove of an absent one, self loop).
TextAttributedGraph apply_flips(const TextAttributedGraph& graph, std::span<const EdgeFlip> flips);

/// {u} together with every node within two hops of u.
std::vector<NodeId> two_hop(const TextAttributedGraph& graph, NodeId u);

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

/// Stratified, seeded split. Global counts use cumulative rounding of the
/// ratio boundaries; classes with fewer than three nodes go to train.
TextAttributedGraph split_nodes(const TextAttributedGraph& graph, SplitRatios ratios,
                                std::uint64_t seed, std::vector<std::string>* warnings = nullptr);

/// Induced subgraph on `nodes` (renumbered in the given order).
TextAttributedGraph induced_subgraph(const TextAttributedGraph& graph, std::span<const NodeId> nodes);

}  // namespace tagraid
