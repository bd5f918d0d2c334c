#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tagraid/featurize.hpp"
#include "tagraid/graph.hpp"
#include "tagraid/template_attack.hpp"
#include "tagraid/victims.hpp"

namespace tagraid {

class ConfusablesTable;

enum class CorrectorKind : std::uint8_t { RuleBased, Remote };

struct RemoteCorrectorConfig {
  /// Base URL, e.g. "http://127.0.0.1:8080".
  std::string endpoint;
  std::string path = "/v1/chat/completions";
  std::string model;
  /// Name of the environment variable holding a bearer token (optional).
  std::string api_key_env;
  double timeout_seconds = 30.0;
  int max_in_flight = 4;
  /// Prompt template file; empty means the installed default.
  std::string prompt_file;
};

struct DefenseConfig {
  double tau = 0.1;
  double prune_p0 = 0.1;
  double smoothing_rho = 0.5;
  CorrectorKind corrector = CorrectorKind::RuleBased;
  RemoteCorrectorConfig remote;
  /// Width of M_global for the sequence victim; 0 means the embedding width.
  int m_global_dim = 0;
  /// Cosine threshold applied while sampling purified trees; defaults to
  /// prune_p0 when unset.
  std::optional<double> tree_tau;

  void validate() const;
};

enum class DefenseKind : std::uint8_t { None, GaLGuardP, GaLGuard };

std::string_view to_string(DefenseKind kind);
DefenseKind defense_kind_from(std::string_view name);

/// Edges (u, v) with cosine(x_u, x_v) < tau, as removals in edge order.
std::vector<EdgeFlip> purify_edges(const TextAttributedGraph& graph, const FeatureMatrix& features, double tau);

/// Per-node neighbour weights aligned with graph.neighbors(u).
struct GuardWeights {
  std::vector<std::size_t> offsets;
  std::vector<double> weights;
  /// Nodes whose every neighbour was pruned (self-only aggregation).
  std::vector<NodeId> self_only;

  std::span<const double> of(NodeId u) const {
    const auto i = static_cast<std::size_t>(u);
    return {weights.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }
};

/// max(0, cosine) per edge, zeroed below prune_p0, normalised over each
/// node's surviving neighbours. With `previous`, the result is blended as
/// rho * previous + (1 - rho) * current (layer memory).
GuardWeights guard_weights(const FeatureMatrix& features, const TextAttributedGraph& graph, double prune_p0,
                           double smoothing_rho, const GuardWeights* previous = nullptr);

/// build_tree with each neighbour pool pre-filtered to cosine >= tau.
ComputationTree purified_tree(const TextAttributedGraph& graph, NodeId u, int d, int k, std::uint64_t seed,
                              const FeatureMatrix& features, double tau);

struct CorrectionReport {
  std::vector<std::string> texts;
  /// Nodes whose text had unbalanced direction controls.
  std::vector<NodeId> unbalanced;
  /// Nodes where the remote corrector failed and the sanitizer was used.
  std::vector<NodeId> fallbacks;
};

/// Corrects every text (no detection gate) with the configured corrector.
CorrectionReport correct_texts(std::span<const std::string> texts, const DefenseConfig& defense,
                               const ConfusablesTable& table);

/// Correct, re-embed and (unless kind is None) purify one input graph.
struct DefendedInput {
  TextAttributedGraph graph;
  FeatureMatrix features;
  std::vector<EdgeFlip> removed;
  CorrectionReport corrections;
};

DefendedInput defend_input(const TextAttributedGraph& graph, const FeaturizerConfig& featurizer,
                           DefenseKind kind, const DefenseConfig& defense, const ConfusablesTable& table);

/// Victim-specific training settings used by the harness and the defense.
struct VictimSpec {
  VictimKind kind = VictimKind::Sequence;
  TrainConfig train;
  SequenceTrainOptions sequence;
  GnnTrainOptions gnn;
};

/// Trains a victim on an already defended input. GaLGuard_p trains the
/// plain victim; GaLGuard adds guard-weighted aggregation (GNN victim) or
/// purified trees plus a jointly trained M_global (sequence victim).
VictimParams train_defended(const VictimSpec& spec, DefenseKind kind, const DefendedInput& input,
                            const DefenseConfig& defense);

/// Trains an undefended victim of the given kind.
VictimParams train_victim(const VictimSpec& spec, const TextAttributedGraph& graph, const FeatureMatrix& features);

}  // namespace tagraid
