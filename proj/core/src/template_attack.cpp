#include "tagraid/template_attack.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "tagraid/error.hpp"
#include "tagraid/rng.hpp"

namespace tagraid {

std::vector<std::size_t> ComputationTree::placeholder_positions() const {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < slots.size(); ++p) {
    if (slots[p] == kPlaceholder) out.push_back(p);
  }
  return out;
}

ComputationTree build_tree(const TextAttributedGraph& graph, NodeId u, const TreeOptions& opts,
                           std::uint64_t seed, const TextAttributedGraph* reference, const NeighborFilter& filter) {
  if (!graph.valid(u)) throw InputError(fmt::format("build_tree: invalid node {}", u));
  const std::size_t positions = tree_positions(opts.depth, opts.fanout);
  const auto k = static_cast<std::size_t>(opts.fanout);
  ComputationTree tree{u, opts.depth, opts.fanout, std::vector<NodeId>(positions, ComputationTree::kPlaceholder)};
  tree.slots[0] = u;
  const std::uint64_t root_seed = derive_seed(seed, "tree", static_cast<std::uint64_t>(u));

  std::vector<NodeId> primary, extra;
  for (std::size_t p = 0; p < positions; ++p) {
    const NodeId v = tree.slots[p];
    if (v == ComputationTree::kPlaceholder || tree.is_leaf_level(p)) continue;
    primary.clear();
    extra.clear();
    for (NodeId w : graph.neighbors(v)) {
      if (filter && !filter(v, w)) continue;
      if (reference && opts.original_first && !reference->has_edge(v, w)) {
        extra.push_back(w);
      } else {
        primary.push_back(w);
      }
    }
    Rng rng(derive_seed(root_seed, "pos", p));
    const std::size_t taken = rng.sample_front(primary, k);
    primary.resize(taken);
    if (taken < k && !extra.empty()) {
      Rng extra_rng(derive_seed(root_seed, "pos.extra", p));
      const std::size_t more = extra_rng.sample_front(extra, k - taken);
      primary.insert(primary.end(), extra.begin(), extra.begin() + static_cast<std::ptrdiff_t>(more));
    }
    const std::size_t first = tree.first_child(p);
    for (std::size_t i = 0; i < primary.size(); ++i) tree.slots[first + i] = primary[i];
  }
  return tree;
}

ComputationTree build_tree(const TextAttributedGraph& graph, NodeId u, int d, int k, std::uint64_t seed) {
  return build_tree(graph, u, TreeOptions{d, k, true}, seed);
}

std::string_view to_string(InjectionStrategy s) {
  switch (s) {
    case InjectionStrategy::NI: return "NI";
    case InjectionStrategy::SI: return "SI";
    case InjectionStrategy::MSI: return "MSI";
  }
  return "?";
}

InjectionStrategy injection_strategy_from(std::string_view name) {
  if (name == "NI" || name == "ni") return InjectionStrategy::NI;
  if (name == "SI" || name == "si") return InjectionStrategy::SI;
  if (name == "MSI" || name == "msi") return InjectionStrategy::MSI;
  throw InputError(fmt::format("unknown injection strategy \"{}\"", name));
}

std::vector<std::size_t> attachable_placeholders(const ComputationTree& tree) {
  std::vector<std::size_t> out;
  for (std::size_t p = 1; p < tree.slots.size(); ++p) {
    if (tree.is_placeholder(p) && !tree.is_placeholder(tree.parent(p))) out.push_back(p);
  }
  return out;
}

std::vector<NodeId> degree_ranked(const TextAttributedGraph& graph, std::span<const NodeId> pool) {
  std::vector<NodeId> out(pool.begin(), pool.end());
  std::sort(out.begin(), out.end(), [&](NodeId a, NodeId b) {
    const auto da = graph.degree(a);
    const auto db = graph.degree(b);
    return da != db ? da > db : a < b;
  });
  return out;
}

InjectionPlan inject(const TextAttributedGraph& graph, NodeId u, const ComputationTree& tree,
                     InjectionStrategy strategy, std::uint64_t seed) {
  if (tree.root != u) throw InputError(fmt::format("inject: tree is rooted at {}, not {}", tree.root, u));
  InjectionPlan plan;
  plan.strategy = strategy;
  plan.target = u;
  const auto slots = attachable_placeholders(tree);
  if (slots.empty()) return plan;

  const auto near = two_hop(graph, u);
  std::vector<NodeId> pool;
  pool.reserve(graph.node_count() - near.size());
  for (std::size_t i = 0, j = 0; i < graph.node_count(); ++i) {
    const auto v = static_cast<NodeId>(i);
    while (j < near.size() && near[j] < v) ++j;
    if (j < near.size() && near[j] == v) continue;
    pool.push_back(v);
  }

  std::vector<std::pair<std::size_t, NodeId>> assignment;
  switch (strategy) {
    case InjectionStrategy::NI: {
      Rng rng(derive_seed(seed, "inject.ni", static_cast<std::uint64_t>(u)));
      const std::size_t take = rng.sample_front(pool, slots.size());
      for (std::size_t i = 0; i < take; ++i) assignment.emplace_back(slots[i], pool[i]);
      plan.shortfall = slots.size() - take;
      break;
    }
    case InjectionStrategy::SI: {
      if (pool.empty()) {
        plan.shortfall = 1;
        break;
      }
      assignment.emplace_back(slots.front(), degree_ranked(graph, pool).front());
      break;
    }
    case InjectionStrategy::MSI: {
      const auto ranked = degree_ranked(graph, pool);
      const std::size_t take = std::min(ranked.size(), slots.size());
      for (std::size_t i = 0; i < take; ++i) assignment.emplace_back(slots[i], ranked[i]);
      plan.shortfall = slots.size() - take;
      break;
    }
  }

  for (const auto& [position, v] : assignment) {
    const NodeId parent = tree.slots[tree.parent(position)];
    if (graph.has_edge(parent, v)) {
      ++plan.shortfall;
      continue;
    }
    plan.filled_positions.emplace(position, v);
    plan.new_edges.push_back(EdgeFlip{parent, v, FlipOp::Add}.canonical());
  }
  return plan;
}

std::vector<EdgeFlip> merge_plans(const TextAttributedGraph& graph, std::span<const InjectionPlan> plans) {
  std::vector<const InjectionPlan*> ordered;
  for (const auto& p : plans) ordered.push_back(&p);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const InjectionPlan* a, const InjectionPlan* b) { return a->target < b->target; });
  std::set<Edge> added;
  std::vector<EdgeFlip> out;
  for (const auto* plan : ordered) {
    for (const auto& f : plan->new_edges) {
      const Edge e = make_edge(f.u, f.v);
      if (graph.has_edge(e.u, e.v) || !added.insert(e).second) continue;
      out.push_back({e.u, e.v, FlipOp::Add});
    }
  }
  return out;
}

Vector node_sequence(const ComputationTree& tree, const FeatureMatrix& features, const Vector& placeholder,
                     const Matrix& pe, double pe_weight) {
  const auto dim = static_cast<Eigen::Index>(features.dim());
  const auto positions = static_cast<Eigen::Index>(tree.positions());
  if (placeholder.size() != dim) throw InputError("node_sequence: placeholder width differs from feature width");
  if (pe.rows() != positions || pe.cols() != dim) {
    throw InputError(fmt::format("node_sequence: PE is {}x{}, tree needs {}x{}", pe.rows(), pe.cols(), positions, dim));
  }
  Vector out(positions * dim);
  for (Eigen::Index p = 0; p < positions; ++p) {
    const NodeId v = tree.slots[static_cast<std::size_t>(p)];
    auto block = out.segment(p * dim, dim);
    if (v == ComputationTree::kPlaceholder) {
      block = placeholder;
    } else {
      block = features.values.row(v).transpose();
    }
    block += pe_weight * pe.row(p).transpose();
  }
  return out;
}

}  // namespace tagraid
