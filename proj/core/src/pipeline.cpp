#include "tagraid/pipeline.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "parallel.hpp"
#include "tagraid/error.hpp"
#include "tagraid/text_attack.hpp"

namespace tagraid {

TextAttributedGraph apply_perturbation(const TextAttributedGraph& clean, const PerturbationSet& perturbation,
                                       const ConfusablesTable& table) {
  TextAttributedGraph out = perturbation.flips.empty() ? clean : apply_flips(clean, perturbation.flips);
  if (perturbation.text_edits.empty()) return out;
  auto texts = out.texts();
  for (const auto& [u, edits] : perturbation.text_edits) {
    if (!out.valid(u)) throw InputError(fmt::format("perturbation edits invalid node {}", u));
    auto& t = texts[static_cast<std::size_t>(u)];
    t = apply_edits(t, edits, table);
  }
  return out.with_texts(std::move(texts));
}

double evasion_apply(const VictimParams& victim, const TextAttributedGraph& clean,
                     const PerturbationSet& perturbation, const FeaturizerConfig& featurizer,
                     const ConfusablesTable& table) {
  const TextAttributedGraph perturbed = apply_perturbation(clean, perturbation, table);
  const FeatureMatrix features = embed_all(perturbed, featurizer);
  return evaluate(victim, perturbed, features, SplitTag::Test, EvalOptions{&clean});
}

InjectionAttack injection_attack(const TextAttributedGraph& graph, std::span<const NodeId> targets,
                                 const TreeOptions& tree, std::uint64_t template_seed, InjectionStrategy strategy,
                                 std::uint64_t seed, std::optional<std::int64_t> edge_cap) {
  std::vector<NodeId> order(targets.begin(), targets.end());
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());

  InjectionAttack out;
  out.plans.resize(order.size());
  detail::parallel_for(order.size(), [&](std::size_t i) {
    const auto t = build_tree(graph, order[i], tree, template_seed);
    out.plans[i] = inject(graph, order[i], t, strategy, seed);
  });

  if (edge_cap) {
    // Keep whole plans while the merged edge count stays within the cap.
    std::vector<InjectionPlan> kept;
    std::set<Edge> added;
    for (auto& plan : out.plans) {
      std::vector<Edge> fresh;
      for (const auto& f : plan.new_edges) {
        const Edge e{f.u, f.v};
        if (!graph.has_edge(e.u, e.v) && !added.contains(e)) fresh.push_back(e);
      }
      std::sort(fresh.begin(), fresh.end());
      fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
      if (static_cast<std::int64_t>(added.size() + fresh.size()) > *edge_cap) {
        ++out.capped_targets;
        continue;
      }
      added.insert(fresh.begin(), fresh.end());
      kept.push_back(std::move(plan));
    }
    out.plans = std::move(kept);
    out.perturbation.flips = merge_plans(graph, out.plans);
    out.perturbation.edge_budget = *edge_cap;
  } else {
    out.perturbation.flips = merge_plans(graph, out.plans);
  }
  for (const auto& plan : out.plans) out.shortfall += plan.shortfall;
  return out;
}

}  // namespace tagraid
