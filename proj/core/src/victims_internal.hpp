#pragma once

#include <functional>
#include <span>
#include <vector>

#include "tagraid/victims.hpp"

namespace tagraid::detail {

/// Mean softmax cross-entropy over rows; writes d(loss)/d(logits) (already
/// divided by the row count) into grad when non-null.
double softmax_cross_entropy(const Matrix& logits, std::span<const int> labels, Matrix* grad);

/// Row-wise softmax.
Matrix softmax_rows(const Matrix& logits);

struct MlpGrad {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
};

/// Backward pass of the projector given its input and output gradient.
/// Returns the gradient with respect to the input rows when wanted.
void mlp_backward(const Mlp& mlp, const Matrix& x, const Matrix& hidden, const Matrix& d_logits, MlpGrad& grad,
                  Matrix* d_input);

/// Hidden activations tanh(x W1 + b1) for rows of x.
Matrix mlp_hidden(const Mlp& mlp, const Matrix& x);

/// Adam on a flat parameter vector. The objective returns the loss and
/// fills the gradient. Stops early with NumericError on a non-finite loss.
void adam_minimize(std::vector<double>& params, int epochs, double lr,
                   const std::function<double(std::span<const double>, std::vector<double>&)>& objective,
                   LossTrace* trace, const char* what);

void append(std::vector<double>& out, const Matrix& m);
void append(std::vector<double>& out, const Vector& v);
void read_into(std::span<const double>& in, Matrix& m);
void read_into(std::span<const double>& in, Vector& v);
void append(std::vector<double>& out, const Mlp& mlp);
void read_into(std::span<const double>& in, Mlp& mlp);
void append(std::vector<double>& out, const MlpGrad& g);

std::vector<int> labels_of(const TextAttributedGraph& graph, std::span<const NodeId> nodes);
std::vector<NodeId> train_nodes(const TextAttributedGraph& graph);
void check_digest(std::uint64_t expected, const FeatureMatrix& features, const char* what);

double surrogate_objective(const SurrogateParams& params, const TextAttributedGraph& graph,
                           const FeatureMatrix& features, double weight_decay, std::vector<double>* grad);

// Objectives shared by training and gradient checks.
class SequenceObjective {
 public:
  SequenceObjective(const SequenceVictimParams& shape, const TextAttributedGraph& graph,
                    const FeatureMatrix& features, std::span<const NodeId> nodes, double weight_decay);
  double operator()(const SequenceVictimParams& params, std::vector<double>* grad) const;

 private:
  Matrix fixed_;       // node rows without placeholder and PE contributions
  Matrix mask_;        // n x positions, 1 at placeholder slots
  Matrix pe_;          // positions x dim
  std::vector<int> labels_;
  double weight_decay_;
  int dim_;
};

class GnnObjective {
 public:
  GnnObjective(const GnnVictimParams& shape, const TextAttributedGraph& graph, const FeatureMatrix& features,
               std::span<const NodeId> nodes, double weight_decay);
  double operator()(const GnnVictimParams& params, std::vector<double>* grad) const;
  Matrix logits(const GnnVictimParams& params) const;

 private:
  struct Neighborhood {
    std::vector<NodeId> members;  // self first
    std::vector<double> log_weight;
  };
  const Matrix* x_;
  std::vector<NodeId> nodes_;
  std::vector<Neighborhood> hoods_;
  std::vector<int> labels_;
  double weight_decay_;
};

}  // namespace tagraid::detail
