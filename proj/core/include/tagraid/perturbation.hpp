#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tagraid/graph.hpp"

namespace tagraid {

/// One imperceptible edit on a node text, addressed by codepoint index in
/// the original text. A Reorder swaps the pair (position, position + 1).
struct TextEdit {
  enum class Kind : std::uint8_t { Homoglyph, Reorder };

  Kind kind = Kind::Homoglyph;
  std::size_t position = 0;
  char32_t original = 0;
  char32_t replacement = 0;

  static TextEdit homoglyph(std::size_t position, char32_t original, char32_t replacement) {
    return {Kind::Homoglyph, position, original, replacement};
  }
  static TextEdit reorder(std::size_t position) { return {Kind::Reorder, position, 0, 0}; }

  std::size_t width() const noexcept { return kind == Kind::Reorder ? 2 : 1; }
  bool overlaps(const TextEdit& other) const noexcept {
    return position < other.position + other.width() && other.position < position + width();
  }
  auto operator<=>(const TextEdit&) const = default;
};

/// The attacker's artifact: structural flips and per-node text edits.
struct PerturbationSet {
  std::vector<EdgeFlip> flips;
  std::map<NodeId, std::vector<TextEdit>> text_edits;
  std::int64_t edge_budget = 0;
  std::map<NodeId, std::int64_t> char_budget_per_node;

  bool empty() const noexcept { return flips.empty() && text_edits.empty(); }
  bool operator==(const PerturbationSet&) const = default;
};

struct DegreeTestOptions {
  bool enabled = false;
  double max_alpha_shift = 0.1;
  int min_degree = 2;
};

struct BudgetReport {
  std::int64_t edge_budget = 0;
  std::int64_t flip_count = 0;
  std::int64_t edge_excess = 0;
  std::int64_t char_budget = 0;
  /// Nodes whose edit count exceeds the per-node character budget.
  std::vector<NodeId> char_violations;
  bool degree_test_run = false;
  double alpha_before = 0.0;
  double alpha_after = 0.0;
  bool degree_test_passed = true;
  bool passed = true;

  bool operator==(const BudgetReport&) const = default;
};

/// Maximum-likelihood power-law exponent of the degree distribution over
/// nodes with degree >= min_degree (discrete approximation).
double power_law_alpha(const TextAttributedGraph& graph, int min_degree = 2);

/// Budget check: |flips| <= floor(fraction * |E|) and each node's edit count
/// <= floor(fraction * mean text length). Never throws on failure.
BudgetReport check_budget(const TextAttributedGraph& original, const PerturbationSet& perturbation,
                          double fraction, const DegreeTestOptions& degree_test = {});

std::int64_t edge_budget(const TextAttributedGraph& graph, double fraction);
std::int64_t char_budget(const TextAttributedGraph& graph, double fraction);

}  // namespace tagraid
