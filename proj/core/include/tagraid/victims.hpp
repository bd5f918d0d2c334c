#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "tagraid/featurize.hpp"
#include "tagraid/graph.hpp"
#include "tagraid/template_attack.hpp"

namespace tagraid {

struct TrainConfig {
  int epochs = 300;
  double learning_rate = 0.05;
  std::uint64_t seed = 1;
  int hidden = 128;
  double weight_decay = 5e-4;

  void validate() const;
};

/// Two-layer tanh perceptron: logits = tanh(x W1 + b1) W2 + b2.
struct Mlp {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;

  static Mlp init(int in, int hidden, int out, std::uint64_t seed);
  Matrix forward(const Matrix& x) const;
  bool operator==(const Mlp&) const = default;
};

/// Linearised two-layer GCN: logits = A_hat A_hat X W.
struct SurrogateParams {
  Matrix w;
  std::uint64_t feature_digest = 0;

  bool operator==(const SurrogateParams&) const = default;
};

/// Stand-in for a sequence-template model: a frozen tree template feeding
/// a trained projector.
struct SequenceVictimParams {
  TreeOptions tree;
  std::uint64_t template_seed = 0;
  Vector placeholder;
  double pe_weight = 0.0;
  Mlp projector;
  std::optional<Vector> m_global;
  /// When set, tree children are kept only if their cosine with the parent
  /// is at least this value (purified trees).
  std::optional<double> tree_filter;
  std::uint64_t feature_digest = 0;

  bool operator==(const SequenceVictimParams&) const = default;
};

struct GuardSettings {
  double prune_p0 = 0.1;
  double smoothing_rho = 0.5;
  bool operator==(const GuardSettings&) const = default;
};

/// Stand-in for a GNN-encoder model: one single-head attention layer over
/// N(u) and u, concatenated with the node's own embedding, then a projector.
struct GnnVictimParams {
  Matrix wa;
  Vector att_src;
  Vector att_dst;
  double residual = 1.0;
  bool residual_enabled = true;
  Mlp projector;
  /// Guard-weighted aggregation (defended variant).
  std::optional<GuardSettings> guard;
  std::uint64_t feature_digest = 0;

  bool operator==(const GnnVictimParams&) const = default;
};

using VictimParams = std::variant<SurrogateParams, SequenceVictimParams, GnnVictimParams>;

enum class VictimKind : std::uint8_t { Surrogate, Sequence, Gnn };

std::string_view to_string(VictimKind kind);
VictimKind victim_kind_from(std::string_view name);
VictimKind kind_of(const VictimParams& params) noexcept;

/// Per-epoch training losses, for monotonicity checks and diagnostics.
using LossTrace = std::vector<double>;

/// Full-batch gradient descent on mean train cross-entropy plus
/// (weight_decay / 2) |W|^2. A step that raises the loss is undone and the
/// step size halved, so the loss trace never increases.
SurrogateParams train_surrogate(const TextAttributedGraph& graph, const FeatureMatrix& features,
                                const TrainConfig& cfg, LossTrace* trace = nullptr);
Matrix surrogate_logits(const SurrogateParams& params, const SparseMatrix& a_hat, const Matrix& x);

struct SequenceTrainOptions {
  TreeOptions tree;
  std::uint64_t template_seed = 0;
  /// Width of the learned global context vector; 0 disables it.
  int m_global_dim = 0;
  std::optional<double> tree_filter;
};

SequenceVictimParams train_sequence_victim(const TextAttributedGraph& graph, const FeatureMatrix& features,
                                           const SequenceTrainOptions& opts, const TrainConfig& cfg,
                                           LossTrace* trace = nullptr);

struct GnnTrainOptions {
  int attention_width = 64;
  bool residual = true;
  std::optional<GuardSettings> guard;
};

GnnVictimParams train_gnn_victim(const TextAttributedGraph& graph, const FeatureMatrix& features,
                                 const GnnTrainOptions& opts, const TrainConfig& cfg, LossTrace* trace = nullptr);

/// Evaluation context. For the sequence victim, a reference graph switches
/// tree construction to original-first sampling against it.
struct EvalOptions {
  const TextAttributedGraph* reference = nullptr;
};

/// Logits for the listed nodes, one row each.
Matrix victim_logits(const VictimParams& victim, const TextAttributedGraph& graph, const FeatureMatrix& features,
                     std::span<const NodeId> nodes, const EvalOptions& opts = {});

/// Row-wise argmax with ties to the lowest class id.
std::vector<int> predict(const Matrix& logits);

/// Fraction of nodes with the given split tag whose prediction is correct.
double evaluate(const VictimParams& victim, const TextAttributedGraph& graph, const FeatureMatrix& features,
                SplitTag tag, const EvalOptions& opts = {});

/// Attention coefficients of node u over [u, neighbours...] (self first).
std::vector<double> gnn_attention(const GnnVictimParams& params, const TextAttributedGraph& graph,
                                  const FeatureMatrix& features, NodeId u);

/// Per-position PE rows (positions x dim), zero-padded past the tree size.
Matrix positional_rows(int depth, int fanout, int dim);

/// Sequence built for one node with the victim's own tree settings.
Vector sequence_input(const SequenceVictimParams& params, const TextAttributedGraph& graph,
                      const FeatureMatrix& features, NodeId u, const EvalOptions& opts = {});

// Binary persistence: magic "TGRV", format version, victim kind, featurizer
// digest, then the parameter blocks (little-endian doubles).
inline constexpr std::uint32_t kVictimFormatVersion = 1;

void save_victim(const VictimParams& victim, const std::filesystem::path& path);
/// Throws InputError on a bad magic, an unknown version, or when
/// expected_digest is given and differs from the stored featurizer digest.
VictimParams load_victim(const std::filesystem::path& path, std::optional<std::uint64_t> expected_digest = {});

// Gradient access for finite-difference checks. Each returns the training
// objective at the given parameters and fills `grad` with its gradient in
// the same flattened order as flatten().
std::vector<double> flatten(const VictimParams& params);
VictimParams unflatten(const VictimParams& like, std::span<const double> values);
double training_objective(const VictimParams& params, const TextAttributedGraph& graph,
                          const FeatureMatrix& features, double weight_decay, std::vector<double>* grad);

}  // namespace tagraid
