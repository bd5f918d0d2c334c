#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tagraid/confusables.hpp"
#include "tagraid/featurize.hpp"
#include "tagraid/graph.hpp"
#include "tagraid/perturbation.hpp"
#include "tagraid/template_attack.hpp"
#include "tagraid/victims.hpp"

namespace tagraid {

/// Applies the flips in order, then each node's text edits.
TextAttributedGraph apply_perturbation(const TextAttributedGraph& clean, const PerturbationSet& perturbation,
                                       const ConfusablesTable& table = ConfusablesTable::builtin());

/// Evasion: the clean-trained victim scores the perturbed graph and its
/// re-embedded texts. Tree sampling of the sequence victim prefers edges
/// of the clean graph. Test nodes are those of the clean graph.
double evasion_apply(const VictimParams& victim, const TextAttributedGraph& clean,
                     const PerturbationSet& perturbation, const FeaturizerConfig& featurizer,
                     const ConfusablesTable& table = ConfusablesTable::builtin());

struct InjectionAttack {
  std::vector<InjectionPlan> plans;
  PerturbationSet perturbation;
  std::size_t shortfall = 0;
  /// Targets whose plan was dropped because it did not fit the edge cap.
  std::size_t capped_targets = 0;
};

/// Builds one plan per target (in ascending id order) from the victim's
/// template on the clean graph and merges them. With an edge cap, a plan
/// whose new edges would exceed it is dropped whole.
InjectionAttack injection_attack(const TextAttributedGraph& graph, std::span<const NodeId> targets,
                                 const TreeOptions& tree, std::uint64_t template_seed, InjectionStrategy strategy,
                                 std::uint64_t seed, std::optional<std::int64_t> edge_cap = {});

}  // namespace tagraid
