#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tagraid/featurize.hpp"
#include "tagraid/graph.hpp"
#include "tagraid/perturbation.hpp"
#include "tagraid/victims.hpp"

namespace tagraid {

// ---- Nettack (greedy, targeted, structure only) ----

/// Surrogate margin of `target`: true-class logit minus the best other
/// class logit. The attack maximises its negation.
double target_margin(const TextAttributedGraph& graph, const FeatureMatrix& features,
                     const SurrogateParams& surrogate, NodeId target);

/// Candidate flips for a target: every pair (a, v) with a in {target} and
/// its neighbours, v != a, as Add when absent and Remove when present.
/// Sorted lexicographically and deduplicated.
std::vector<EdgeFlip> nettack_candidates(const TextAttributedGraph& graph, NodeId target);

struct NettackResult {
  std::vector<EdgeFlip> flips;
  /// Attacker loss (negated margin) before any flip, then after each flip.
  std::vector<double> losses;
  /// Set when the target had no admissible candidate at all.
  bool no_candidates = false;
};

/// Greedily commits the candidate with the largest attacker loss (ties to
/// the smallest flip) while it strictly increases the loss, up to budget.
NettackResult nettack_target(const TextAttributedGraph& graph, const FeatureMatrix& features,
                             const SurrogateParams& surrogate, NodeId target, std::int64_t budget);

/// Runs nettack_target over test nodes in seeded order on the running
/// perturbed graph until floor(total_fraction * |E|) flips are used.
PerturbationSet nettack_untargeted(const TextAttributedGraph& graph, const FeatureMatrix& features,
                                   const SurrogateParams& surrogate, std::span<const NodeId> test_nodes,
                                   std::int64_t per_target_budget, double total_fraction, std::uint64_t seed);

// ---- MetaAttack (meta-gradient, global) ----

struct MetattackConfig {
  double fraction = 0.1;
  int unroll_t = 100;
  double inner_lr = 0.1;
  double weight_decay = 5e-4;
  /// Attacker loss = mean train cross-entropy plus mean cross-entropy of
  /// the unlabeled nodes against the clean surrogate's predictions
  /// ("Meta-Self"); off means the train term only.
  bool self_training = true;
  std::uint64_t seed = 1;
  /// Surrogate used for the pseudo-labels.
  TrainConfig surrogate;

  void validate() const;
};

/// Everything the meta-gradient depends on besides the adjacency.
struct MetaProblem {
  Matrix x;
  int num_classes = 0;
  /// Inner training nodes and their labels.
  std::vector<NodeId> train;
  std::vector<int> train_labels;
  /// Per-node attacker target class, or -1 when the node is not scored.
  std::vector<int> attack_labels;
  /// Per-node weight of its cross-entropy in the attacker loss.
  std::vector<double> attack_weights;
  Matrix w0;
  int unroll_t = 1;
  double inner_lr = 0.1;
  double weight_decay = 0.0;
};

/// Builds the problem: seeded W0, train labels, and pseudo-labels from a
/// surrogate trained on the clean graph.
MetaProblem make_meta_problem(const TextAttributedGraph& graph, const FeatureMatrix& features,
                              const MetattackConfig& cfg);

/// Attacker loss after unroll_t inner gradient steps on the (possibly
/// real-valued, symmetric) adjacency. With `grad`, also fills the
/// symmetric derivative dL/dA[u][v] where A[u][v] and A[v][u] move
/// together; the diagonal is zero.
double meta_gradient(const MetaProblem& problem, const Matrix& adjacency, Matrix* grad);

/// Dense 0/1 adjacency of the graph.
Matrix dense_adjacency(const TextAttributedGraph& graph);

struct MetattackTrace {
  std::vector<double> losses;
  std::vector<double> scores;
};

/// Greedy meta-gradient attack. Throws NumericError naming the iteration
/// when the meta-gradient is not finite.
PerturbationSet metattack(const TextAttributedGraph& graph, const FeatureMatrix& features,
                          const MetattackConfig& cfg, MetattackTrace* trace = nullptr);

/// Best flip under the score S = grad * (1 - 2A) over pairs u < v not in
/// `excluded` (canonical pairs). Ties go to the smallest (u, v).
EdgeFlip best_meta_flip(const Matrix& grad, const Matrix& adjacency, std::span<const Edge> excluded,
                        double* score = nullptr);

}  // namespace tagraid
