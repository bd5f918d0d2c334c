#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "parallel.hpp"
#include "tagraid/error.hpp"
#include "tagraid/rng.hpp"
#include "tagraid/struct_attack.hpp"

namespace tagraid {

namespace {

// Adjacency lists with at most one pending flip layered on top, so many
// candidates can be scored concurrently against one shared base.
class LocalView {
 public:
  LocalView(const TextAttributedGraph& graph, const Matrix& h) : graph_(graph), h_(h) {}

  Vector logits(NodeId target, const EdgeFlip* flip) const {
    flip_ = flip;
    Vector out = Vector::Zero(h_.cols());
    const double dt = degree(target);
    for_each_closed(target, [&](NodeId j) {
      const double dj = degree(j);
      Vector inner = Vector::Zero(h_.cols());
      for_each_closed(j, [&](NodeId k) { inner += h_.row(k).transpose() / std::sqrt(dj * degree(k)); });
      out += inner / std::sqrt(dt * dj);
    });
    return out;
  }

 private:
  double degree(NodeId i) const {
    double d = 1.0 + static_cast<double>(graph_.degree(i));
    if (flip_ && (i == flip_->u || i == flip_->v)) d += flip_->op == FlipOp::Add ? 1.0 : -1.0;
    return d;
  }

  // Visits i itself, then its neighbours under the pending flip.
  template <typename Fn>
  void for_each_closed(NodeId i, Fn&& fn) const {
    fn(i);
    NodeId other = -1;
    if (flip_ && i == flip_->u) other = flip_->v;
    if (flip_ && i == flip_->v) other = flip_->u;
    for (NodeId j : graph_.neighbors(i)) {
      if (j == other && flip_->op == FlipOp::Remove) continue;
      fn(j);
    }
    if (other >= 0 && flip_->op == FlipOp::Add) fn(other);
  }

  const TextAttributedGraph& graph_;
  const Matrix& h_;
  // Thread-confined: every LocalView is used by a single thread at a time.
  mutable const EdgeFlip* flip_ = nullptr;
};

double margin_of(const Vector& logits, int label) {
  double best_other = -std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < logits.size(); ++c) {
    if (c != label) best_other = std::max(best_other, logits(c));
  }
  return logits(label) - best_other;
}

void check_inputs(const TextAttributedGraph& graph, const FeatureMatrix& features, const SurrogateParams& surrogate) {
  if (features.rows() != graph.node_count()) throw InputError("nettack: feature rows differ from node count");
  if (surrogate.w.rows() != features.dim() || surrogate.w.cols() != graph.num_classes()) {
    throw InputError("nettack: surrogate shape does not match features and classes");
  }
}

NettackResult run_target(const TextAttributedGraph& graph, const Matrix& h, NodeId target, std::int64_t budget) {
  if (budget < 1) throw InputError(fmt::format("nettack: budget must be >= 1 (got {})", budget));
  if (!graph.valid(target)) throw InputError(fmt::format("nettack: invalid target {}", target));
  NettackResult result;
  const int label = graph.label(target);
  TextAttributedGraph current = graph;
  result.losses.push_back(-margin_of(LocalView(current, h).logits(target, nullptr), label));

  for (std::int64_t step = 0; step < budget; ++step) {
    const auto candidates = nettack_candidates(current, target);
    if (candidates.empty()) {
      if (step == 0) result.no_candidates = true;
      break;
    }
    std::vector<double> losses(candidates.size());
    detail::parallel_for(candidates.size(), [&](std::size_t i) {
      const LocalView view(current, h);
      losses[i] = -margin_of(view.logits(target, &candidates[i]), label);
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
      if (losses[i] > losses[best] + 1e-12) best = i;
    }
    if (!(losses[best] > result.losses.back() + 1e-12)) break;
    result.flips.push_back(candidates[best]);
    result.losses.push_back(losses[best]);
    current = apply_flips(current, std::span(&candidates[best], 1));
  }
  return result;
}

}  // namespace

double target_margin(const TextAttributedGraph& graph, const FeatureMatrix& features,
                     const SurrogateParams& surrogate, NodeId target) {
  check_inputs(graph, features, surrogate);
  if (!graph.valid(target)) throw InputError(fmt::format("nettack: invalid target {}", target));
  const Matrix h = features.values * surrogate.w;
  return margin_of(LocalView(graph, h).logits(target, nullptr), graph.label(target));
}

std::vector<EdgeFlip> nettack_candidates(const TextAttributedGraph& graph, NodeId target) {
  std::vector<NodeId> anchors{target};
  for (NodeId j : graph.neighbors(target)) anchors.push_back(j);
  std::vector<EdgeFlip> out;
  const auto n = static_cast<NodeId>(graph.node_count());
  for (NodeId a : anchors) {
    for (NodeId v = 0; v < n; ++v) {
      if (v == a) continue;
      const Edge e = make_edge(a, v);
      out.push_back({e.u, e.v, graph.has_edge(a, v) ? FlipOp::Remove : FlipOp::Add});
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

NettackResult nettack_target(const TextAttributedGraph& graph, const FeatureMatrix& features,
                             const SurrogateParams& surrogate, NodeId target, std::int64_t budget) {
  check_inputs(graph, features, surrogate);
  return run_target(graph, features.values * surrogate.w, target, budget);
}

PerturbationSet nettack_untargeted(const TextAttributedGraph& graph, const FeatureMatrix& features,
                                   const SurrogateParams& surrogate, std::span<const NodeId> test_nodes,
                                   std::int64_t per_target_budget, double total_fraction, std::uint64_t seed) {
  check_inputs(graph, features, surrogate);
  PerturbationSet out;
  out.edge_budget = edge_budget(graph, total_fraction);
  if (test_nodes.empty() || out.edge_budget == 0) return out;
  if (per_target_budget < 1) throw InputError("nettack: per-target budget must be >= 1");

  std::vector<NodeId> order(test_nodes.begin(), test_nodes.end());
  Rng rng(derive_seed(seed, "nettack.order"));
  rng.shuffle(order);

  const Matrix h = features.values * surrogate.w;
  TextAttributedGraph current = graph;
  for (NodeId t : order) {
    const auto remaining = out.edge_budget - static_cast<std::int64_t>(out.flips.size());
    if (remaining <= 0) break;
    const auto r = run_target(current, h, t, std::min(per_target_budget, remaining));
    if (r.flips.empty()) continue;
    current = apply_flips(current, r.flips);
    out.flips.insert(out.flips.end(), r.flips.begin(), r.flips.end());
  }
  return out;
}

}  // namespace tagraid
