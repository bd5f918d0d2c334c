#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "parallel.hpp"
#include "tagraid/error.hpp"
#include "tagraid/levenshtein.hpp"
#include "tagraid/rng.hpp"
#include "tagraid/text_attack.hpp"
#include "tagraid/utf8.hpp"
#include "text_internal.hpp"

namespace tagraid {

namespace {

using Genes = std::vector<std::size_t>;

bool by_position(const TextEdit& a, const TextEdit& b) { return a.position < b.position; }

// Drops genes that repeat or conflict with an earlier gene; returns the kept
// edits sorted by position. Kept edits are disjoint, so a new edit can only
// overlap its neighbours in that order, and of the kept reorders on one side
// the nearest has the narrowest gap.
std::vector<TextEdit> repair(Genes& genes, const std::vector<TextEdit>& candidates, const EditConflicts& conflicts) {
  std::vector<TextEdit> kept;
  kept.reserve(genes.size());
  std::vector<std::size_t> reorders;
  for (auto& g : genes) {
    if (g == 0) continue;
    const TextEdit& e = candidates[g - 1];
    const auto at = std::lower_bound(kept.begin(), kept.end(), e, by_position);
    bool clash = (at != kept.end() && conflicts(*at, e)) || (at != kept.begin() && conflicts(*std::prev(at), e));
    const auto r = std::lower_bound(reorders.begin(), reorders.end(), e.position);
    if (!clash && e.kind == TextEdit::Kind::Reorder) {
      clash = (r != reorders.end() && conflicts(TextEdit::reorder(*r), e)) ||
              (r != reorders.begin() && conflicts(TextEdit::reorder(*std::prev(r)), e));
    }
    if (clash) {
      g = 0;
      continue;
    }
    if (e.kind == TextEdit::Kind::Reorder) reorders.insert(r, e.position);
    kept.insert(at, e);
  }
  return kept;
}

class Fitness {
 public:
  Fitness(std::string_view text, const BlackBox& black_box)
      : text_(utf8::decode(text)), black_box_(black_box), reference_(black_box(text)) {}

  Fitness(const Fitness&) = delete;
  Fitness& operator=(const Fitness&) = delete;

  const std::u32string& text() const noexcept { return text_; }

  // `edits`: valid for the text and sorted by position.
  double operator()(std::span<const TextEdit> edits) const {
    if (edits.empty()) return 0.0;
    const auto out = black_box_(utf8::encode(detail::render_sorted_edits(text_, edits)));
    return static_cast<double>(reference_.distance(out));
  }

 private:
  std::u32string text_;
  const BlackBox& black_box_;
  MyersPattern reference_;
};

}  // namespace

void DEConfig::validate() const {
  if (population < 4) throw InputError(fmt::format("DE: population must be >= 4 (got {})", population));
  if (!(f > 0.0 && f <= 2.0)) throw InputError(fmt::format("DE: F must be in (0, 2] (got {})", f));
  if (!(cr >= 0.0 && cr <= 1.0)) throw InputError(fmt::format("DE: CR must be in [0, 1] (got {})", cr));
  if (generations < 0) throw InputError("DE: generations must be >= 0");
}

BlackBox ngram_black_box(const FeaturizerConfig& cfg) {
  return [cfg](std::string_view text) { return ngram_stream(text, cfg); };
}

double genome_fitness(std::string_view text, std::span<const TextEdit> edits, const BlackBox& black_box,
                      const ConfusablesTable& table) {
  const Fitness fitness(text, black_box);
  validate_edits(fitness.text(), edits, table);
  std::vector<TextEdit> sorted(edits.begin(), edits.end());
  std::sort(sorted.begin(), sorted.end(), by_position);
  return fitness(sorted);
}

EvolveResult evolve(std::string_view text, const BlackBox& black_box, std::size_t budget, const DEConfig& cfg,
                    const ConfusablesTable& table, EditSpace space) {
  cfg.validate();
  if (budget < 1) throw InputError("evolve: budget must be >= 1");
  EvolveResult result;
  const auto candidates = enumerate_edits(text, table, space);
  result.candidates = candidates.size();
  if (candidates.empty()) {
    result.empty_candidates = true;
    result.best_trace.assign(static_cast<std::size_t>(cfg.generations) + 1, 0.0);
    return result;
  }
  const Fitness fitness(text, black_box);
  const EditConflicts conflicts(fitness.text());
  const std::size_t genes = budget;
  const std::size_t range = candidates.size() + 1;  // gene values 0 .. M
  const auto np = static_cast<std::size_t>(cfg.population);
  Rng rng(cfg.seed);

  std::vector<Genes> pop(np, Genes(genes));
  std::vector<double> score(np);
  for (std::size_t i = 0; i < np; ++i) {
    for (auto& g : pop[i]) g = 1 + rng.below(candidates.size());
    score[i] = fitness(repair(pop[i], candidates, conflicts));
  }
  auto best_index = [&] {
    return static_cast<std::size_t>(std::max_element(score.begin(), score.end()) - score.begin());
  };
  result.best_trace.push_back(score[best_index()]);

  Genes trial(genes);
  for (int gen = 0; gen < cfg.generations; ++gen) {
    for (std::size_t i = 0; i < np; ++i) {
      std::size_t r[3];
      for (int k = 0; k < 3; ++k) {
        do {
          r[k] = rng.below(np);
        } while (r[k] == i || (k > 0 && r[k] == r[0]) || (k > 1 && r[k] == r[1]));
      }
      const std::size_t forced = rng.below(genes);
      for (std::size_t j = 0; j < genes; ++j) {
        if (j == forced || rng.uniform() < cfg.cr) {
          const double v = static_cast<double>(pop[r[0]][j]) +
                           cfg.f * (static_cast<double>(pop[r[1]][j]) - static_cast<double>(pop[r[2]][j]));
          auto w = static_cast<long long>(std::llround(v)) % static_cast<long long>(range);
          if (w < 0) w += static_cast<long long>(range);
          trial[j] = static_cast<std::size_t>(w);
        } else {
          trial[j] = pop[i][j];
        }
      }
      const double s = fitness(repair(trial, candidates, conflicts));
      if (s >= score[i]) {
        pop[i] = trial;
        score[i] = s;
      }
    }
    result.best_trace.push_back(score[best_index()]);
  }

  const std::size_t b = best_index();
  result.best.edits = repair(pop[b], candidates, conflicts);
  result.best.fitness = score[b];
  return result;
}

EditGenome random_genome(std::string_view text, std::size_t size, std::uint64_t seed, const ConfusablesTable& table,
                         EditSpace space) {
  auto candidates = enumerate_edits(text, table, space);
  const EditConflicts conflicts(utf8::decode(text));
  Rng rng(seed);
  rng.shuffle(candidates);
  EditGenome g;
  for (const auto& e : candidates) {
    if (g.edits.size() >= size) break;
    if (std::any_of(g.edits.begin(), g.edits.end(), [&](const TextEdit& o) { return conflicts(o, e); })) continue;
    g.edits.push_back(e);
  }
  std::sort(g.edits.begin(), g.edits.end(), by_position);
  return g;
}

FeatureAttack perturb_features(const TextAttributedGraph& graph, std::span<const NodeId> nodes, double fraction,
                               const BlackBox& black_box, const DEConfig& cfg, const ConfusablesTable& table,
                               EditSpace space) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw InputError(fmt::format("perturb_features: fraction must be in (0, 1] (got {})", fraction));
  }
  cfg.validate();
  FeatureAttack attack;
  attack.char_budget = char_budget(graph, fraction);
  if (nodes.empty() || attack.char_budget < 1) return attack;

  std::vector<EvolveResult> results(nodes.size());
  detail::parallel_for(nodes.size(), [&](std::size_t i) {
    DEConfig node_cfg = cfg;
    node_cfg.seed = derive_seed(cfg.seed, "de.node", static_cast<std::uint64_t>(nodes[i]));
    results[i] = evolve(graph.text(nodes[i]), black_box, static_cast<std::size_t>(attack.char_budget), node_cfg,
                        table, space);
  });
  double total = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const NodeId u = nodes[i];
    auto& r = results[i];
    total += r.best.fitness;
    if (r.empty_candidates) attack.empty_candidates.push_back(u);
    if (r.best.edits.empty()) continue;
    for (const auto& e : r.best.edits) {
      (e.kind == TextEdit::Kind::Reorder ? attack.reorder_edits : attack.homoglyph_edits) += 1;
    }
    attack.texts[u] = apply_edits(graph.text(u), r.best.edits, table);
    attack.edits[u] = std::move(r.best.edits);
  }
  attack.mean_fitness = total / static_cast<double>(nodes.size());
  return attack;
}

TextAttributedGraph apply_feature_attack(const TextAttributedGraph& graph, const FeatureAttack& attack) {
  if (attack.texts.empty()) return graph;
  auto texts = graph.texts();
  for (const auto& [u, t] : attack.texts) {
    if (!graph.valid(u)) throw InputError(fmt::format("feature attack references invalid node {}", u));
    texts[static_cast<std::size_t>(u)] = t;
  }
  return graph.with_texts(std::move(texts));
}

}  // namespace tagraid
