#include "tagraid/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>
#include <set>
#include <unordered_map>

#include "tagraid/error.hpp"
#include "tagraid/perturbation.hpp"
#include "tagraid/rng.hpp"
#include "tagraid/utf8.hpp"

namespace tagraid {

std::string_view to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::Train: return "train";
    case SplitTag::Val: return "val";
    case SplitTag::Test: return "test";
    case SplitTag::None: break;
  }
  return "none";
}

std::string_view to_string(FlipOp op) { return op == FlipOp::Add ? "add" : "remove"; }

Edge make_edge(NodeId a, NodeId b) noexcept { return a < b ? Edge{a, b} : Edge{b, a}; }

EdgeFlip EdgeFlip::canonical() const noexcept {
  return u < v ? *this : EdgeFlip{v, u, op};
}

EdgeFlip EdgeFlip::inverse() const noexcept {
  return {u, v, op == FlipOp::Add ? FlipOp::Remove : FlipOp::Add};
}

TextAttributedGraph::TextAttributedGraph(std::vector<std::string> texts, std::vector<int> labels,
                                         int num_classes, std::vector<Edge> edges,
                                         std::vector<SplitTag> split,
                                         std::vector<std::string> external_ids,
                                         std::vector<std::string> class_names)
    : num_classes_(num_classes) {
  const std::size_t n = labels.size();
  if (texts.size() != n) {
    throw InputError(fmt::format("graph: {} texts for {} labels", texts.size(), n));
  }
  if (split.empty()) split.assign(n, SplitTag::None);
  if (split.size() != n) throw InputError("graph: split length differs from node count");
  if (external_ids.empty()) {
    external_ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) external_ids.push_back(std::to_string(i));
  }
  if (external_ids.size() != n) throw InputError("graph: id list length differs from node count");
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw InputError(fmt::format("graph: node {} has label {} outside [0, {})", i, labels[i], num_classes));
    }
  }
  if (class_names.empty()) {
    for (int c = 0; c < num_classes; ++c) class_names.push_back(std::to_string(c));
  }
  for (auto& e : edges) {
    if (e.u < 0 || e.v < 0 || static_cast<std::size_t>(e.u) >= n || static_cast<std::size_t>(e.v) >= n) {
      throw InputError(fmt::format("graph: edge ({}, {}) has an endpoint outside [0, {})", e.u, e.v, n));
    }
    if (e.u == e.v) throw InputError(fmt::format("graph: self loop on node {}", e.u));
    e = make_edge(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  texts_ = std::make_shared<const std::vector<std::string>>(std::move(texts));
  labels_ = std::make_shared<const std::vector<int>>(std::move(labels));
  ids_ = std::make_shared<const std::vector<std::string>>(std::move(external_ids));
  class_names_ = std::make_shared<const std::vector<std::string>>(std::move(class_names));
  split_ = std::move(split);
  edges_ = std::move(edges);
  build_adjacency();
}

void TextAttributedGraph::build_adjacency() {
  const std::size_t n = node_count();
  offsets_.assign(n + 1, 0);
  for (const auto& e : edges_) {
    ++offsets_[static_cast<std::size_t>(e.u) + 1];
    ++offsets_[static_cast<std::size_t>(e.v) + 1];
  }
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  adjacency_.assign(offsets_.back(), 0);
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& e : edges_) {
    adjacency_[cursor[static_cast<std::size_t>(e.u)]++] = e.v;
    adjacency_[cursor[static_cast<std::size_t>(e.v)]++] = e.u;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
              adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]));
  }
}

std::span<const NodeId> TextAttributedGraph::neighbors(NodeId u) const {
  const auto i = static_cast<std::size_t>(u);
  return {adjacency_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

std::size_t TextAttributedGraph::degree(NodeId u) const {
  const auto i = static_cast<std::size_t>(u);
  return offsets_[i + 1] - offsets_[i];
}

bool TextAttributedGraph::has_edge(NodeId a, NodeId b) const {
  if (!valid(a) || !valid(b) || a == b) return false;
  auto nb = neighbors(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

std::vector<NodeId> TextAttributedGraph::nodes_with(SplitTag tag) const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < split_.size(); ++i) {
    if (split_[i] == tag) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

double TextAttributedGraph::mean_text_length() const {
  if (node_count() == 0) return 0.0;
  double total = 0.0;
  for (const auto& t : *texts_) total += static_cast<double>(utf8::length(t));
  return total / static_cast<double>(node_count());
}

TextAttributedGraph TextAttributedGraph::with_edges(std::vector<Edge> edges) const {
  TextAttributedGraph g = *this;
  const std::size_t n = node_count();
  for (auto& e : edges) {
    if (e.u < 0 || e.v < 0 || static_cast<std::size_t>(e.u) >= n || static_cast<std::size_t>(e.v) >= n) {
      throw InputError(fmt::format("graph: edge ({}, {}) has an endpoint outside [0, {})", e.u, e.v, n));
    }
    if (e.u == e.v) throw InputError(fmt::format("graph: self loop on node {}", e.u));
    e = make_edge(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  g.edges_ = std::move(edges);
  g.build_adjacency();
  return g;
}

TextAttributedGraph TextAttributedGraph::with_texts(std::vector<std::string> texts) const {
  if (texts.size() != node_count()) throw InputError("graph: replacement texts have the wrong length");
  TextAttributedGraph g = *this;
  g.texts_ = std::make_shared<const std::vector<std::string>>(std::move(texts));
  return g;
}

TextAttributedGraph TextAttributedGraph::with_split(std::vector<SplitTag> split) const {
  if (split.size() != node_count()) throw InputError("graph: replacement split has the wrong length");
  TextAttributedGraph g = *this;
  g.split_ = std::move(split);
  return g;
}

bool TextAttributedGraph::same_content(const TextAttributedGraph& other) const {
  return num_classes_ == other.num_classes_ && *labels_ == *other.labels_ &&
         *texts_ == *other.texts_ && split_ == other.split_ && edges_ == other.edges_;
}

TextAttributedGraph apply_flips(const TextAttributedGraph& graph, std::span<const EdgeFlip> flips) {
  if (flips.empty()) return graph;
  std::set<Edge> edges(graph.edges().begin(), graph.edges().end());
  for (std::size_t i = 0; i < flips.size(); ++i) {
    const auto& f = flips[i];
    if (!graph.valid(f.u) || !graph.valid(f.v) || f.u == f.v) {
      throw InputError(fmt::format("apply_flips: flip {} ({}, {}) is not a valid node pair", i, f.u, f.v));
    }
    const Edge e = make_edge(f.u, f.v);
    if (f.op == FlipOp::Add) {
      if (!edges.insert(e).second) {
        throw InputError(fmt::format("apply_flips: flip {} adds existing edge ({}, {})", i, e.u, e.v));
      }
    } else if (edges.erase(e) == 0) {
      throw InputError(fmt::format("apply_flips: flip {} removes absent edge ({}, {})", i, e.u, e.v));
    }
  }
  return graph.with_edges(std::vector<Edge>(edges.begin(), edges.end()));
}

std::vector<NodeId> two_hop(const TextAttributedGraph& graph, NodeId u) {
  if (!graph.valid(u)) throw InputError(fmt::format("two_hop: invalid node {}", u));
  std::vector<NodeId> out{u};
  for (NodeId v : graph.neighbors(u)) {
    out.push_back(v);
    for (NodeId w : graph.neighbors(v)) out.push_back(w);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

TextAttributedGraph split_nodes(const TextAttributedGraph& graph, SplitRatios ratios,
                                std::uint64_t seed, std::vector<std::string>* warnings) {
  const double sum = ratios.train + ratios.val + ratios.test;
  if (std::abs(sum - 1.0) > 1e-9 || ratios.train < 0 || ratios.val < 0 || ratios.test < 0) {
    throw InputError(fmt::format("split_nodes: ratios must be non-negative and sum to 1 (got {})", sum));
  }
  const std::size_t n = graph.node_count();
  std::vector<std::vector<NodeId>> by_class(static_cast<std::size_t>(graph.num_classes()));
  for (std::size_t i = 0; i < n; ++i) {
    by_class[static_cast<std::size_t>(graph.label(static_cast<NodeId>(i)))].push_back(static_cast<NodeId>(i));
  }

  // Nodes are ordered by their quantile within their own class, so every
  // prefix of the ordering is close to class-proportional.
  struct Keyed {
    double key;
    std::uint64_t tie;
    NodeId node;
  };
  std::vector<Keyed> order;
  order.reserve(n);
  std::size_t forced = 0;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    Rng rng(derive_seed(seed, "split", c));
    rng.shuffle(members);
    if (!members.empty() && members.size() < 3) {
      if (warnings) {
        warnings->push_back(fmt::format("class {} has {} node(s); all assigned to train", c, members.size()));
      }
      for (NodeId v : members) order.push_back({-1.0, rng.next(), v});
      forced += members.size();
      continue;
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
      const double q = (static_cast<double>(i) + 0.5) / static_cast<double>(members.size());
      order.push_back({q, rng.next(), members[i]});
    }
  }
  std::sort(order.begin(), order.end(), [](const Keyed& a, const Keyed& b) {
    if (a.key != b.key) return a.key < b.key;
    if (a.tie != b.tie) return a.tie < b.tie;
    return a.node < b.node;
  });

  const auto dn = static_cast<double>(n);
  auto n_train = static_cast<std::size_t>(std::llround(ratios.train * dn));
  auto boundary = static_cast<std::size_t>(std::llround((ratios.train + ratios.val) * dn));
  boundary = std::min(boundary, n);
  n_train = std::min(std::max(n_train, forced), boundary);
  std::size_t n_val = boundary - n_train;
  std::size_t n_test = n - boundary;
  // Guarantee one node per tag with a positive ratio when there is room.
  if (n >= 3) {
    if (ratios.test > 0 && n_test == 0 && n_train > std::max<std::size_t>(forced, 1)) {
      --n_train;
      ++n_test;
    }
    if (ratios.val > 0 && n_val == 0 && n_train > std::max<std::size_t>(forced, 1)) {
      --n_train;
      ++n_val;
    }
  }

  std::vector<SplitTag> tags(n, SplitTag::None);
  for (std::size_t i = 0; i < order.size(); ++i) {
    SplitTag t = SplitTag::Test;
    if (i < n_train) {
      t = SplitTag::Train;
    } else if (i < n_train + n_val) {
      t = SplitTag::Val;
    }
    tags[static_cast<std::size_t>(order[i].node)] = t;
  }
  return graph.with_split(std::move(tags));
}

TextAttributedGraph induced_subgraph(const TextAttributedGraph& graph, std::span<const NodeId> nodes) {
  std::unordered_map<NodeId, NodeId> remap;
  std::vector<std::string> texts, ids;
  std::vector<int> labels;
  std::vector<SplitTag> split;
  for (NodeId v : nodes) {
    if (!graph.valid(v)) throw InputError(fmt::format("induced_subgraph: invalid node {}", v));
    if (!remap.emplace(v, static_cast<NodeId>(remap.size())).second) {
      throw InputError(fmt::format("induced_subgraph: node {} listed twice", v));
    }
    texts.push_back(graph.text(v));
    ids.push_back(graph.external_ids()[static_cast<std::size_t>(v)]);
    labels.push_back(graph.label(v));
    split.push_back(graph.split(v));
  }
  std::vector<Edge> edges;
  for (const auto& e : graph.edges()) {
    auto a = remap.find(e.u);
    auto b = remap.find(e.v);
    if (a != remap.end() && b != remap.end()) edges.push_back(make_edge(a->second, b->second));
  }
  return TextAttributedGraph(std::move(texts), std::move(labels), graph.num_classes(), std::move(edges),
                             std::move(split), std::move(ids), graph.class_names());
}

std::int64_t edge_budget(const TextAttributedGraph& graph, double fraction) {
  return static_cast<std::int64_t>(std::floor(fraction * static_cast<double>(graph.edge_count()) + 1e-9));
}

std::int64_t char_budget(const TextAttributedGraph& graph, double fraction) {
  return static_cast<std::int64_t>(std::floor(fraction * graph.mean_text_length() + 1e-9));
}

double power_law_alpha(const TextAttributedGraph& graph, int min_degree) {
  double log_sum = 0.0;
  std::size_t count = 0;
  const double shift = static_cast<double>(min_degree) - 0.5;
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    const auto d = graph.degree(static_cast<NodeId>(i));
    if (d >= static_cast<std::size_t>(min_degree)) {
      log_sum += std::log(static_cast<double>(d) / shift);
      ++count;
    }
  }
  if (count == 0 || log_sum <= 0.0) return 0.0;
  return 1.0 + static_cast<double>(count) / log_sum;
}

BudgetReport check_budget(const TextAttributedGraph& original, const PerturbationSet& perturbation,
                          double fraction, const DegreeTestOptions& degree_test) {
  BudgetReport r;
  r.edge_budget = edge_budget(original, fraction);
  r.flip_count = static_cast<std::int64_t>(perturbation.flips.size());
  r.edge_excess = std::max<std::int64_t>(0, r.flip_count - r.edge_budget);
  r.char_budget = char_budget(original, fraction);
  for (const auto& [node, edits] : perturbation.text_edits) {
    std::int64_t limit = r.char_budget;
    if (auto it = perturbation.char_budget_per_node.find(node); it != perturbation.char_budget_per_node.end()) {
      limit = std::min(limit, it->second);
    }
    if (static_cast<std::int64_t>(edits.size()) > limit) r.char_violations.push_back(node);
  }
  r.passed = r.edge_excess == 0 && r.char_violations.empty();
  if (degree_test.enabled && !perturbation.flips.empty()) {
    r.degree_test_run = true;
    r.alpha_before = power_law_alpha(original, degree_test.min_degree);
    try {
      r.alpha_after = power_law_alpha(apply_flips(original, perturbation.flips), degree_test.min_degree);
      r.degree_test_passed = std::abs(r.alpha_after - r.alpha_before) <= degree_test.max_alpha_shift;
    } catch (const InputError&) {
      r.degree_test_passed = false;
    }
    r.passed = r.passed && r.degree_test_passed;
  }
  return r;
}

}  // namespace tagraid
