#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tagraid/confusables.hpp"
#include "tagraid/featurize.hpp"
#include "tagraid/graph.hpp"
#include "tagraid/perturbation.hpp"

namespace tagraid {

struct EditSpace {
  bool homoglyphs = true;
  bool reorders = true;
};

/// Every homoglyph substitution (one per table variant) and every adjacent
/// pair of strong left-to-right letters or digits that can be swapped.
/// Sorted by (position, kind, replacement).
std::vector<TextEdit> enumerate_edits(std::string_view text, const ConfusablesTable& table,
                                      EditSpace space = {});

/// Pairwise compatibility of edits on one text. Besides overlapping, two
/// reorders conflict unless a strong left-to-right codepoint separates
/// them: otherwise the text between resolves to the override direction and
/// both swaps reverse as one run.
class EditConflicts {
 public:
  explicit EditConflicts(std::u32string_view text);
  bool operator()(const TextEdit& a, const TextEdit& b) const noexcept;

 private:
  // strong_[i]: strong left-to-right codepoints in text[0, i).
  std::vector<std::uint32_t> strong_;
};

/// Throws InputError if an edit does not fit the text or two edits conflict.
void validate_edits(std::u32string_view text, std::span<const TextEdit> edits, const ConfusablesTable& table);

/// Homoglyphs replace in place; a Reorder at i stores RLO, c[i+1], c[i], PDF
/// in place of c[i] c[i+1]. The rendered text is unchanged.
std::string apply_edits(std::string_view text, std::span<const TextEdit> edits,
                        const ConfusablesTable& table = ConfusablesTable::builtin());
std::u32string apply_edits(std::u32string_view text, std::span<const TextEdit> edits,
                           const ConfusablesTable& table = ConfusablesTable::builtin());

/// Display order with each codepoint replaced by its confusable class
/// representative: what a reader sees, up to look-alike glyphs.
std::u32string canonical_display(std::u32string_view text, const ConfusablesTable& table);
bool render_equivalent(std::string_view original, std::string_view perturbed, const ConfusablesTable& table);

struct DEConfig {
  int population = 20;
  double f = 0.8;
  double cr = 0.7;
  int generations = 30;
  std::uint64_t seed = 1;

  void validate() const;
};

using BlackBox = std::function<std::vector<std::uint32_t>(std::string_view)>;

/// The featurizer's ordered n-gram bucket stream.
BlackBox ngram_black_box(const FeaturizerConfig& cfg);

struct EditGenome {
  std::vector<TextEdit> edits;
  double fitness = 0.0;
};

struct EvolveResult {
  EditGenome best;
  /// Best fitness after initialisation and after each generation.
  std::vector<double> best_trace;
  std::size_t candidates = 0;
  /// No candidate edits existed for the text.
  bool empty_candidates = false;
};

/// Levenshtein distance between the black box outputs on the original and
/// the edited text.
double genome_fitness(std::string_view text, std::span<const TextEdit> edits, const BlackBox& black_box,
                      const ConfusablesTable& table = ConfusablesTable::builtin());

/// DE/rand/1/bin over integer genomes of length `budget` indexing the
/// candidate list (gene 0 is a no-op). Mutants wrap modulo the gene range;
/// duplicate or overlapping genes are repaired to no-ops; selection keeps
/// the trial when its fitness is at least the parent's.
EvolveResult evolve(std::string_view text, const BlackBox& black_box, std::size_t budget, const DEConfig& cfg,
                    const ConfusablesTable& table = ConfusablesTable::builtin(), EditSpace space = {});

/// A uniformly drawn valid genome with exactly min(size, feasible) edits.
EditGenome random_genome(std::string_view text, std::size_t size, std::uint64_t seed,
                         const ConfusablesTable& table = ConfusablesTable::builtin(), EditSpace space = {});

struct FeatureAttack {
  std::map<NodeId, std::string> texts;
  std::map<NodeId, std::vector<TextEdit>> edits;
  std::int64_t char_budget = 0;
  double mean_fitness = 0.0;
  std::size_t reorder_edits = 0;
  std::size_t homoglyph_edits = 0;
  std::vector<NodeId> empty_candidates;
};

/// Runs evolve on each listed node with budget floor(fraction * mean text
/// length); the DE seed of node u is derived from (cfg.seed, u).
FeatureAttack perturb_features(const TextAttributedGraph& graph, std::span<const NodeId> nodes, double fraction,
                               const BlackBox& black_box, const DEConfig& cfg,
                               const ConfusablesTable& table = ConfusablesTable::builtin(), EditSpace space = {});

/// Graph with the attacked texts substituted.
TextAttributedGraph apply_feature_attack(const TextAttributedGraph& graph, const FeatureAttack& attack);

}  // namespace tagraid
