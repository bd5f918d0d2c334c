#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tagraid/featurize.hpp"
#include "tagraid/galguard.hpp"
#include "tagraid/graph.hpp"
#include "tagraid/perturbation.hpp"
#include "tagraid/struct_attack.hpp"
#include "tagraid/text_attack.hpp"
#include "tagraid/victims.hpp"

namespace tagraid {

inline constexpr int kConfigVersion = 1;

enum class Phase : std::uint8_t { Poisoning, Evasion };
std::string_view to_string(Phase phase);
Phase phase_from(std::string_view name);

enum class AttackKind : std::uint8_t { None, Nettack, Metattack, NI, SI, MSI, Feature, Unified };
std::string_view to_string(AttackKind kind);
AttackKind attack_kind_from(std::string_view name);

/// Either a dataset directory or a synthetic profile name.
struct DatasetSpec {
  std::string path;
  std::string synthetic;
  std::uint64_t synthetic_seed = 0;
  /// Name used in reports; defaults to the directory or profile name.
  std::string label;
};

struct AttackSettings {
  /// Unnoticeability budget: share of edges and of the mean text length.
  double budget_fraction = 0.1;
  std::int64_t nettack_per_target = 5;
  MetattackConfig metattack;
  DEConfig de;
  /// Text attack targets: every node, or only the test nodes.
  bool text_all_nodes = true;
  /// Caps injection attacks at the edge budget (whole plans are dropped).
  bool cap_injection = false;
  /// Graphs above this size attack a seeded induced subgraph.
  std::size_t max_dense_nodes = 20000;
  std::size_t subgraph_nodes = 8000;
};

struct ExperimentConfig {
  int version = kConfigVersion;
  std::string name = "experiment";
  DatasetSpec dataset;
  SplitRatios split;
  /// Use the dataset's own split instead of a seeded one.
  bool dataset_split = false;
  FeaturizerConfig featurizer;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<VictimKind> victims{VictimKind::Sequence, VictimKind::Gnn};
  std::vector<AttackKind> attacks{AttackKind::None};
  std::vector<Phase> phases{Phase::Evasion};
  std::vector<DefenseKind> defenses{DefenseKind::None};
  TrainConfig surrogate_train;
  TrainConfig sequence_train;
  TrainConfig gnn_train;
  TreeOptions tree;
  GnnTrainOptions gnn;
  AttackSettings attack;
  DefenseConfig defense;
  /// Extra confusables file merged into the built-in table.
  std::string confusables;
  /// Directory for reusable perturbations and trained victims; empty disables.
  std::string cache_dir;
  std::string output = "out";

  ExperimentConfig();
  void validate() const;
};

/// Parses a config document. Every object rejects unknown keys; "version"
/// is required. Each override is "dotted.key=value" where value is JSON or,
/// failing that, a bare string; overrides are applied before validation.
ExperimentConfig parse_config(std::string_view json_text, std::span<const std::string> overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides = {});
/// Fully resolved config as canonical JSON (every field present).
std::string config_to_json(const ExperimentConfig& cfg);
std::uint64_t config_digest(const ExperimentConfig& cfg);

/// Loads the dataset (or generates the synthetic one) without splitting.
TextAttributedGraph load_experiment_graph(const DatasetSpec& spec);
std::string dataset_label(const DatasetSpec& spec);

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::optional<double> accuracy;
  std::string error;
  BudgetReport budget;
  std::int64_t flips = 0;
  std::int64_t edited_nodes = 0;
  std::int64_t reorder_edits = 0;
  std::int64_t homoglyph_edits = 0;
  std::int64_t injection_shortfall = 0;
  std::int64_t capped_targets = 0;
  std::int64_t purified_edges = 0;
  std::int64_t corrector_fallbacks = 0;
  std::int64_t unbalanced_texts = 0;
  double wall_seconds = 0.0;

  bool operator==(const SeedOutcome&) const = default;
};

struct CellReport {
  VictimKind victim = VictimKind::Sequence;
  AttackKind attack = AttackKind::None;
  Phase phase = Phase::Evasion;
  DefenseKind defense = DefenseKind::None;
  std::vector<SeedOutcome> seeds;
  /// Over the seeds that finished. Population standard deviation.
  double mean = 0.0;
  double std = 0.0;
  /// (clean - attacked) / clean in percent, against the clean cell with the
  /// same victim, phase and defense.
  std::optional<double> percent_drop;
  bool partial = false;

  bool operator==(const CellReport&) const = default;
};

struct ExperimentReport {
  std::string tool_version;
  std::string name;
  std::string dataset;
  /// Resolved config as canonical JSON.
  std::string config_json;
  std::uint64_t config_digest = 0;
  std::vector<CellReport> cells;
  bool partial = false;
  std::vector<std::string> diagnostics;
  std::string disclaimer;
  double wall_seconds = 0.0;

  const CellReport* find(VictimKind victim, AttackKind attack, Phase phase, DefenseKind defense) const;
  bool operator==(const ExperimentReport&) const = default;
};

struct RunOptions {
  std::function<void(std::string_view)> progress;
};

/// Runs the full matrix victims x attacks x phases x defenses for every
/// seed. Clean cells are always included. A failing seed is recorded in
/// its cells and marks the report partial; it never aborts the others.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// The graph a seed works on: loaded, subsampled when too large for the
/// dense attacks, and split (or carrying the dataset split).
TextAttributedGraph seed_graph(const ExperimentConfig& cfg, std::uint64_t seed);

/// The perturbation run_experiment would apply for (seed, attack, phase).
PerturbationSet generate_attack(const ExperimentConfig& cfg, std::uint64_t seed, AttackKind attack, Phase phase);

/// Scores one victim under an arbitrary perturbation of seed_graph(cfg,
/// seed). Evasion uses the clean-trained victim; poisoning retrains on the
/// perturbed input. Errors are returned in the outcome, not thrown. With
/// `victim_file` (evasion only) the clean victim is loaded from that file
/// when present and saved there after training otherwise.
SeedOutcome evaluate_perturbation(const ExperimentConfig& cfg, std::uint64_t seed, VictimKind victim, Phase phase,
                                  DefenseKind defense, const PerturbationSet& perturbation,
                                  const std::optional<std::filesystem::path>& victim_file = {});

// Reports.
std::string report_to_json(const ExperimentReport& report, bool with_timing = true);
ExperimentReport report_from_json(std::string_view text);
/// Accepts one report object or an array of them.
std::vector<ExperimentReport> reports_from_json(std::string_view text);
/// One row per dataset x attack x phase x defense; per victim a
/// "mean±std" column and a percent-drop column.
std::string report_table_csv(std::span<const ExperimentReport> reports);
/// Writes report.json (an array when there are several) and table.csv.
void emit_report(std::span<const ExperimentReport> reports, const std::filesystem::path& dir);

}  // namespace tagraid
