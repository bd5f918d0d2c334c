#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>

#include <fmt/format.h>

#include "parallel.hpp"
#include "tagraid/confusables.hpp"
#include "tagraid/error.hpp"
#include "tagraid/harness.hpp"
#include "tagraid/pipeline.hpp"
#include "tagraid/rng.hpp"
#include "tagraid/serialize.hpp"
#include "tagraid/version.hpp"

namespace tagraid {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr std::string_view kDisclaimer =
    "stand-in victims: accuracies come from desk-scale models over a hashed n-gram embedder, not LLM "
    "backbones; percent drops are comparable in direction, not magnitude";

bool uses_metattack(const ExperimentConfig& cfg) {
  for (auto a : cfg.attacks) {
    if (a == AttackKind::Metattack || a == AttackKind::Unified) return true;
  }
  return false;
}

bool is_injection(AttackKind a) { return a == AttackKind::NI || a == AttackKind::SI || a == AttackKind::MSI; }

InjectionStrategy strategy_of(AttackKind a) {
  switch (a) {
    case AttackKind::NI: return InjectionStrategy::NI;
    case AttackKind::SI: return InjectionStrategy::SI;
    default: return InjectionStrategy::MSI;
  }
}

std::uint64_t graph_digest(const TextAttributedGraph& g) {
  std::uint64_t h = fnv1a64(fmt::format("{}:{}:{}", g.node_count(), g.edge_count(), g.num_classes()));
  for (const auto& t : g.texts()) h = fnv1a64(t, h ^ 0x1f);
  for (int l : g.labels()) h = fnv1a64(std::to_string(l), h);
  for (const auto& e : g.edges()) h = fnv1a64(fmt::format("{},{}", e.u, e.v), h);
  return h;
}

// Settings an artifact depends on, so cache entries are never reused
// across incompatible runs.
std::string artifact_scope(const ExperimentConfig& cfg, std::uint64_t data_digest) {
  ExperimentConfig scope = cfg;
  scope.name.clear();
  scope.seeds = {0};
  scope.victims = {VictimKind::Sequence};
  scope.attacks = {AttackKind::None};
  scope.phases = {Phase::Evasion};
  scope.defenses = {DefenseKind::None};
  scope.cache_dir.clear();
  scope.output.clear();
  return fmt::format("{:016x}|{}", data_digest, config_to_json(scope));
}

struct AttackOutcome {
  PerturbationSet set;
  TextAttributedGraph perturbed;
  std::int64_t reorder = 0;
  std::int64_t homoglyph = 0;
  std::int64_t shortfall = 0;
  std::int64_t capped = 0;
};

class SeedRun {
 public:
  SeedRun(const ExperimentConfig& cfg, const TextAttributedGraph& graph, std::string scope, std::uint64_t seed,
          const ConfusablesTable& table, std::function<void(std::string_view)> log)
      : cfg_(cfg), scope_(std::move(scope)), seed_(seed), table_(table), log_(std::move(log)) {
    if (cfg.dataset_split) {
      for (auto tag : graph.splits()) {
        if (tag == SplitTag::None) throw InputError("dataset split requested but some nodes have no split tag");
      }
      clean_ = graph;
    } else {
      clean_ = split_nodes(graph, cfg.split, derive_seed(seed, "split"));
    }
    fraction_ = cfg.attack.budget_fraction;
  }

  const TextAttributedGraph& clean() const { return clean_; }

  PerturbationSet attack_set(AttackKind attack, Phase phase) { return attack_outcome(attack, phase).set; }

  // Scores a perturbation that did not come from this run's generators.
  SeedOutcome external(VictimKind victim, Phase phase, DefenseKind defense, const PerturbationSet& perturbation,
                       const std::optional<std::filesystem::path>& victim_file) {
    const auto start = Clock::now();
    SeedOutcome out;
    out.seed = seed_;
    try {
      const TextAttributedGraph perturbed = apply_perturbation(clean_, perturbation, table_);
      const DefendedInput input = defend_input(perturbed, cfg_.featurizer, defense, cfg_.defense, table_);
      if (phase == Phase::Evasion) {
        // Injected nodes are the only case that models placeholder fills.
        const bool injected = perturbed.node_count() > clean_.node_count() && cfg_.tree.original_first;
        std::optional<VictimParams> stored;
        if (victim_file && std::filesystem::exists(*victim_file)) {
          stored = load_victim(*victim_file, cfg_.featurizer.digest());
          if (kind_of(*stored) != victim) {
            throw InputError(fmt::format("{} holds a {} victim, not {}", victim_file->string(),
                                         to_string(kind_of(*stored)), to_string(victim)));
          }
        } else if (victim_file) {
          save_victim(clean_model(victim, defense), *victim_file);
        }
        out.accuracy = evaluate(stored ? *stored : clean_model(victim, defense), input.graph, input.features,
                                SplitTag::Test, EvalOptions{injected ? &clean_ : nullptr});
      } else {
        const VictimParams model = train_defended(spec(victim), defense, input, cfg_.defense);
        out.accuracy = evaluate(model, input.graph, input.features, SplitTag::Test);
      }
      out.budget = check_budget(clean_, perturbation, fraction_);
      out.flips = static_cast<std::int64_t>(perturbation.flips.size());
      out.edited_nodes = static_cast<std::int64_t>(perturbation.text_edits.size());
      for (const auto& [u, edits] : perturbation.text_edits) {
        for (const auto& e : edits) (e.kind == TextEdit::Kind::Reorder ? out.reorder_edits : out.homoglyph_edits) += 1;
      }
      out.purified_edges = static_cast<std::int64_t>(input.removed.size());
      out.corrector_fallbacks = static_cast<std::int64_t>(input.corrections.fallbacks.size());
      out.unbalanced_texts = static_cast<std::int64_t>(input.corrections.unbalanced.size());
    } catch (const std::exception& e) {
      out.accuracy.reset();
      out.error = e.what();
    }
    out.wall_seconds = seconds_since(start);
    return out;
  }

  SeedOutcome cell(VictimKind victim, AttackKind attack, Phase phase, DefenseKind defense) {
    const auto start = Clock::now();
    SeedOutcome out;
    out.seed = seed_;
    try {
      if (attack == AttackKind::None) {
        const auto& input = clean_input(defense);
        out.accuracy = evaluate(clean_model(victim, defense), input.graph, input.features, SplitTag::Test);
        out.purified_edges = static_cast<std::int64_t>(input.removed.size());
        out.budget = check_budget(clean_, PerturbationSet{}, fraction_);
      } else {
        const AttackOutcome& a = attack_outcome(attack, phase);
        const DefendedInput& input = attacked_input(attack, phase, defense);
        if (phase == Phase::Evasion) {
          // Original-first tree sampling only models injected placeholder
          // fills; other attacks are seen through uniform sampling.
          const bool original_first = is_injection(attack) && cfg_.tree.original_first;
          out.accuracy = evaluate(clean_model(victim, defense), input.graph, input.features, SplitTag::Test,
                                  EvalOptions{original_first ? &clean_ : nullptr});
        } else {
          const VictimParams model = poisoned_model(victim, attack, defense, input);
          out.accuracy = evaluate(model, input.graph, input.features, SplitTag::Test);
        }
        out.budget = check_budget(clean_, a.set, fraction_);
        out.flips = static_cast<std::int64_t>(a.set.flips.size());
        out.edited_nodes = static_cast<std::int64_t>(a.set.text_edits.size());
        out.reorder_edits = a.reorder;
        out.homoglyph_edits = a.homoglyph;
        out.injection_shortfall = a.shortfall;
        out.capped_targets = a.capped;
        out.purified_edges = static_cast<std::int64_t>(input.removed.size());
        out.corrector_fallbacks = static_cast<std::int64_t>(input.corrections.fallbacks.size());
        out.unbalanced_texts = static_cast<std::int64_t>(input.corrections.unbalanced.size());
      }
    } catch (const std::exception& e) {
      out.accuracy.reset();
      out.error = e.what();
    }
    out.wall_seconds = seconds_since(start);
    return out;
  }

 private:
  void log(std::string_view what) const {
    if (log_) log_(fmt::format("[seed {}] {}", seed_, what));
  }

  std::optional<std::filesystem::path> cache_path(std::string_view kind, std::string_view key,
                                                  std::string_view ext) const {
    if (cfg_.cache_dir.empty()) return std::nullopt;
    const std::uint64_t h = fnv1a64(key, fnv1a64(scope_));
    return std::filesystem::path(cfg_.cache_dir) / fmt::format("{}-{:016x}.{}", kind, h, ext);
  }

  VictimSpec spec(VictimKind kind) const {
    VictimSpec s;
    s.kind = kind;
    switch (kind) {
      case VictimKind::Surrogate: s.train = cfg_.surrogate_train; break;
      case VictimKind::Sequence: s.train = cfg_.sequence_train; break;
      case VictimKind::Gnn: s.train = cfg_.gnn_train; break;
    }
    s.train.seed = derive_seed(seed_, "victim", static_cast<std::uint64_t>(kind));
    s.sequence.tree = cfg_.tree;
    s.sequence.template_seed = template_seed();
    s.gnn = cfg_.gnn;
    return s;
  }

  std::uint64_t template_seed() const { return derive_seed(seed_, "template"); }

  const FeatureMatrix& clean_features() {
    if (!clean_features_) clean_features_ = embed_all(clean_, cfg_.featurizer);
    return *clean_features_;
  }

  const DefendedInput& clean_input(DefenseKind defense) {
    auto it = clean_inputs_.find(defense);
    if (it == clean_inputs_.end()) {
      it = clean_inputs_.emplace(defense, defend_input(clean_, cfg_.featurizer, defense, cfg_.defense, table_)).first;
    }
    return it->second;
  }

  // Trains (or loads) a victim, going through the artifact cache.
  VictimParams trained(const std::string& key, const std::function<VictimParams()>& train) {
    const auto path = cache_path("victim", key, "tgrv");
    if (path && std::filesystem::exists(*path)) return load_victim(*path, cfg_.featurizer.digest());
    log(fmt::format("training {}", key));
    VictimParams v = train();
    if (path) {
      std::filesystem::create_directories(path->parent_path());
      save_victim(v, *path);
    }
    return v;
  }

  const VictimParams& clean_model(VictimKind victim, DefenseKind defense) {
    const auto key = std::make_pair(victim, defense);
    auto it = clean_models_.find(key);
    if (it == clean_models_.end()) {
      const auto name = fmt::format("seed={} victim={} defense={} clean", seed_, to_string(victim), to_string(defense));
      VictimParams v = trained(name, [&] { return train_defended(spec(victim), defense, clean_input(defense), cfg_.defense); });
      it = clean_models_.emplace(key, std::move(v)).first;
    }
    return it->second;
  }

  VictimParams poisoned_model(VictimKind victim, AttackKind attack, DefenseKind defense, const DefendedInput& input) {
    const auto name = fmt::format("seed={} victim={} defense={} poisoned={}", seed_, to_string(victim),
                                  to_string(defense), to_string(attack));
    return trained(name, [&] { return train_defended(spec(victim), defense, input, cfg_.defense); });
  }

  const DefendedInput& attacked_input(AttackKind attack, Phase phase, DefenseKind defense) {
    const auto key = std::make_tuple(attack, is_injection(attack) ? phase : Phase::Evasion, defense);
    auto it = attacked_inputs_.find(key);
    if (it == attacked_inputs_.end()) {
      const AttackOutcome& a = attack_outcome(attack, phase);
      it = attacked_inputs_.emplace(key, defend_input(a.perturbed, cfg_.featurizer, defense, cfg_.defense, table_)).first;
    }
    return it->second;
  }

  const AttackOutcome& attack_outcome(AttackKind attack, Phase phase) {
    // Only injection targets depend on the phase (train vs test nodes).
    const auto key = std::make_pair(attack, is_injection(attack) ? phase : Phase::Evasion);
    auto it = attacks_.find(key);
    if (it != attacks_.end()) return it->second;

    AttackOutcome out;
    const auto name = fmt::format("seed={} attack={} phase={}", seed_, to_string(attack), to_string(key.second));
    const auto path = cache_path("perturbation", name, "json");
    if (path && std::filesystem::exists(*path) && !is_injection(attack)) {
      out.set = perturbation_from_json(read_text_file(*path));
    } else {
      log(fmt::format("generating {}", name));
      out = generate(attack, key.second);
      if (path && !is_injection(attack)) write_text_file(*path, perturbation_to_json(out.set));
    }
    if (!is_injection(attack)) {
      for (const auto& [u, edits] : out.set.text_edits) {
        for (const auto& e : edits) (e.kind == TextEdit::Kind::Reorder ? out.reorder : out.homoglyph) += 1;
      }
    }
    out.perturbed = apply_perturbation(clean_, out.set, table_);
    return attacks_.emplace(key, std::move(out)).first->second;
  }

  AttackOutcome generate(AttackKind attack, Phase phase) {
    AttackOutcome out;
    switch (attack) {
      case AttackKind::None:
        break;
      case AttackKind::Nettack: {
        TrainConfig t = cfg_.surrogate_train;
        t.seed = derive_seed(seed_, "nettack.surrogate");
        const SurrogateParams surrogate = train_surrogate(clean_, clean_features(), t);
        const auto test = clean_.nodes_with(SplitTag::Test);
        out.set = nettack_untargeted(clean_, clean_features(), surrogate, test, cfg_.attack.nettack_per_target,
                                     fraction_, derive_seed(seed_, "nettack"));
        break;
      }
      case AttackKind::Metattack:
        out.set = metattack_set();
        break;
      case AttackKind::Feature:
        out.set = feature_set();
        break;
      case AttackKind::Unified: {
        out.set = metattack_set();
        const PerturbationSet text = feature_set();
        out.set.text_edits = text.text_edits;
        out.set.char_budget_per_node = text.char_budget_per_node;
        break;
      }
      case AttackKind::NI:
      case AttackKind::SI:
      case AttackKind::MSI: {
        const auto targets = clean_.nodes_with(phase == Phase::Poisoning ? SplitTag::Train : SplitTag::Test);
        std::optional<std::int64_t> cap;
        if (cfg_.attack.cap_injection) cap = edge_budget(clean_, fraction_);
        auto inj = injection_attack(clean_, targets, cfg_.tree, template_seed(), strategy_of(attack),
                                    derive_seed(seed_, "inject"), cap);
        out.set = std::move(inj.perturbation);
        if (!cap) out.set.edge_budget = edge_budget(clean_, fraction_);
        out.shortfall = static_cast<std::int64_t>(inj.shortfall);
        out.capped = static_cast<std::int64_t>(inj.capped_targets);
        break;
      }
    }
    return out;
  }

  PerturbationSet metattack_set() {
    if (!meta_) {
      MetattackConfig m = cfg_.attack.metattack;
      m.fraction = fraction_;
      m.seed = derive_seed(seed_, "metattack");
      m.surrogate = cfg_.surrogate_train;
      m.surrogate.seed = derive_seed(seed_, "metattack.surrogate");
      meta_ = metattack(clean_, clean_features(), m);
    }
    return *meta_;
  }

  PerturbationSet feature_set() {
    if (!feature_) {
      DEConfig de = cfg_.attack.de;
      de.seed = derive_seed(seed_, "feature");
      std::vector<NodeId> nodes;
      if (cfg_.attack.text_all_nodes) {
        for (std::size_t i = 0; i < clean_.node_count(); ++i) nodes.push_back(static_cast<NodeId>(i));
      } else {
        nodes = clean_.nodes_with(SplitTag::Test);
      }
      const FeatureAttack fa =
          perturb_features(clean_, nodes, fraction_, ngram_black_box(cfg_.featurizer), de, table_);
      PerturbationSet p;
      p.text_edits = fa.edits;
      for (const auto& [u, _] : fa.edits) p.char_budget_per_node[u] = fa.char_budget;
      feature_ = std::move(p);
    }
    return *feature_;
  }

  const ExperimentConfig& cfg_;
  std::string scope_;
  std::uint64_t seed_;
  const ConfusablesTable& table_;
  std::function<void(std::string_view)> log_;
  TextAttributedGraph clean_;
  double fraction_ = 0.1;
  std::optional<FeatureMatrix> clean_features_;
  std::optional<PerturbationSet> meta_;
  std::optional<PerturbationSet> feature_;
  std::map<DefenseKind, DefendedInput> clean_inputs_;
  std::map<std::pair<VictimKind, DefenseKind>, VictimParams> clean_models_;
  std::map<std::pair<AttackKind, Phase>, AttackOutcome> attacks_;
  std::map<std::tuple<AttackKind, Phase, DefenseKind>, DefendedInput> attacked_inputs_;
};

ConfusablesTable confusables_for(const ExperimentConfig& cfg) {
  ConfusablesTable table = ConfusablesTable::builtin();
  if (!cfg.confusables.empty()) table.merge(ConfusablesTable::load(cfg.confusables));
  return table;
}

bool needs_subgraph(const ExperimentConfig& cfg, const TextAttributedGraph& graph) {
  return uses_metattack(cfg) && graph.node_count() > cfg.attack.max_dense_nodes;
}

TextAttributedGraph subgraph_for(const ExperimentConfig& cfg, const TextAttributedGraph& graph, std::uint64_t seed) {
  std::vector<NodeId> nodes(graph.node_count());
  for (std::size_t k = 0; k < nodes.size(); ++k) nodes[k] = static_cast<NodeId>(k);
  Rng rng(derive_seed(seed, "subgraph"));
  rng.sample_front(nodes, cfg.attack.subgraph_nodes);
  nodes.resize(cfg.attack.subgraph_nodes);
  std::sort(nodes.begin(), nodes.end());
  return induced_subgraph(graph, nodes);
}

// Everything a single-seed entry point needs.
struct SeedContext {
  TextAttributedGraph graph;
  ConfusablesTable table;
  std::string scope;
};

SeedContext seed_context(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  TextAttributedGraph graph = load_experiment_graph(cfg.dataset);
  std::string scope = artifact_scope(cfg, graph_digest(graph));
  if (needs_subgraph(cfg, graph)) graph = subgraph_for(cfg, graph, seed);
  return {std::move(graph), confusables_for(cfg), std::move(scope)};
}

struct CellKey {
  VictimKind victim;
  AttackKind attack;
  Phase phase;
  DefenseKind defense;
};

std::vector<CellKey> matrix_cells(const ExperimentConfig& cfg) {
  std::vector<AttackKind> attacks{AttackKind::None};
  for (auto a : cfg.attacks) {
    if (std::find(attacks.begin(), attacks.end(), a) == attacks.end()) attacks.push_back(a);
  }
  std::vector<CellKey> cells;
  for (auto phase : cfg.phases)
    for (auto defense : cfg.defenses)
      for (auto attack : attacks)
        for (auto victim : cfg.victims) cells.push_back({victim, attack, phase, defense});
  return cells;
}

void summarize(CellReport& cell) {
  std::vector<double> acc;
  for (const auto& s : cell.seeds) {
    if (s.accuracy) acc.push_back(*s.accuracy);
    else cell.partial = true;
  }
  if (acc.empty()) return;
  double sum = 0.0;
  for (double a : acc) sum += a;
  cell.mean = sum / static_cast<double>(acc.size());
  double var = 0.0;
  for (double a : acc) var += (a - cell.mean) * (a - cell.mean);
  cell.std = std::sqrt(var / static_cast<double>(acc.size()));
}

}  // namespace

const CellReport* ExperimentReport::find(VictimKind victim, AttackKind attack, Phase phase, DefenseKind defense) const {
  for (const auto& c : cells) {
    if (c.victim == victim && c.attack == attack && c.phase == phase && c.defense == defense) return &c;
  }
  return nullptr;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const auto start = Clock::now();
  std::mutex log_mutex;
  auto log = [&](std::string_view line) {
    if (!options.progress) return;
    std::lock_guard lock(log_mutex);
    options.progress(line);
  };

  ExperimentReport report;
  report.tool_version = std::string(version_string());
  report.name = cfg.name;
  report.config_json = config_to_json(cfg);
  report.config_digest = config_digest(cfg);
  report.disclaimer = std::string(kDisclaimer);
  report.dataset = dataset_label(cfg.dataset);

  TextAttributedGraph graph = load_experiment_graph(cfg.dataset);
  const ConfusablesTable table = confusables_for(cfg);

  const auto cells = matrix_cells(cfg);
  const bool subgraph = needs_subgraph(cfg, graph);
  if (subgraph) {
    report.dataset += fmt::format("-{}k", cfg.attack.subgraph_nodes / 1000);
    report.diagnostics.push_back(fmt::format("graph has {} nodes; every seed runs on a seeded induced subgraph of {}",
                                             graph.node_count(), cfg.attack.subgraph_nodes));
  }
  const std::string scope = artifact_scope(cfg, graph_digest(graph));

  std::vector<std::vector<SeedOutcome>> per_seed(cfg.seeds.size());
  detail::parallel_for(cfg.seeds.size(), [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[i];
    auto& outcomes = per_seed[i];
    try {
      SeedRun run(cfg, subgraph ? subgraph_for(cfg, graph, seed) : graph, scope, seed, table, log);
      for (const auto& c : cells) {
        outcomes.push_back(run.cell(c.victim, c.attack, c.phase, c.defense));
        const auto& o = outcomes.back();
        log(fmt::format("[seed {}] {} {} {} {}: {}", seed, to_string(c.victim), to_string(c.attack),
                        to_string(c.phase), to_string(c.defense),
                        o.accuracy ? fmt::format("{:.4f}", *o.accuracy) : "error: " + o.error));
      }
    } catch (const std::exception& e) {
      outcomes.clear();
      for (std::size_t k = 0; k < cells.size(); ++k) {
        SeedOutcome o;
        o.seed = seed;
        o.error = e.what();
        outcomes.push_back(std::move(o));
      }
    }
  });

  for (std::size_t k = 0; k < cells.size(); ++k) {
    CellReport cell;
    cell.victim = cells[k].victim;
    cell.attack = cells[k].attack;
    cell.phase = cells[k].phase;
    cell.defense = cells[k].defense;
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
      const auto& o = per_seed[i][k];
      if (!o.error.empty()) {
        report.diagnostics.push_back(fmt::format("seed {} {}/{}/{}/{}: {}", o.seed, to_string(cell.victim),
                                                 to_string(cell.attack), to_string(cell.phase),
                                                 to_string(cell.defense), o.error));
      }
      cell.seeds.push_back(o);
    }
    summarize(cell);
    report.partial = report.partial || cell.partial;
    report.cells.push_back(std::move(cell));
  }
  for (auto& cell : report.cells) {
    const CellReport* clean = report.find(cell.victim, AttackKind::None, cell.phase, cell.defense);
    const bool has_data = std::any_of(cell.seeds.begin(), cell.seeds.end(), [](const auto& s) { return s.accuracy.has_value(); });
    const bool clean_data =
        clean && std::any_of(clean->seeds.begin(), clean->seeds.end(), [](const auto& s) { return s.accuracy.has_value(); });
    if (has_data && clean_data && clean->mean > 0.0) cell.percent_drop = (clean->mean - cell.mean) / clean->mean * 100.0;
  }
  report.wall_seconds = seconds_since(start);
  return report;
}

TextAttributedGraph seed_graph(const ExperimentConfig& cfg, std::uint64_t seed) {
  SeedContext ctx = seed_context(cfg, seed);
  SeedRun run(cfg, ctx.graph, ctx.scope, seed, ctx.table, {});
  return run.clean();
}

PerturbationSet generate_attack(const ExperimentConfig& cfg, std::uint64_t seed, AttackKind attack, Phase phase) {
  SeedContext ctx = seed_context(cfg, seed);
  SeedRun run(cfg, ctx.graph, ctx.scope, seed, ctx.table, {});
  return run.attack_set(attack, phase);
}

SeedOutcome evaluate_perturbation(const ExperimentConfig& cfg, std::uint64_t seed, VictimKind victim, Phase phase,
                                  DefenseKind defense, const PerturbationSet& perturbation,
                                  const std::optional<std::filesystem::path>& victim_file) {
  SeedOutcome failed;
  failed.seed = seed;
  try {
    SeedContext ctx = seed_context(cfg, seed);
    SeedRun run(cfg, ctx.graph, ctx.scope, seed, ctx.table, {});
    return run.external(victim, phase, defense, perturbation, victim_file);
  } catch (const std::exception& e) {
    failed.error = e.what();
    return failed;
  }
}

}  // namespace tagraid
