#include <cmath>

#include <fmt/format.h>

#include "tagraid/error.hpp"
#include "tagraid/rng.hpp"
#include "victims_internal.hpp"

namespace tagraid {

namespace {

struct SurrogateProblem {
  Matrix z;  // rows of A_hat A_hat X for the train nodes
  std::vector<int> labels;
  double weight_decay = 0.0;

  double loss(const Matrix& w, Matrix* grad) const {
    Matrix d_logits;
    const double ce = detail::softmax_cross_entropy(z * w, labels, grad ? &d_logits : nullptr);
    if (grad) *grad = z.transpose() * d_logits + weight_decay * w;
    return ce + 0.5 * weight_decay * w.squaredNorm();
  }
};

SurrogateProblem make_problem(const TextAttributedGraph& graph, const FeatureMatrix& features, double weight_decay) {
  const auto nodes = detail::train_nodes(graph);
  const SparseMatrix a_hat = normalized_adjacency(graph);
  const Matrix propagated = a_hat * (a_hat * features.values);
  SurrogateProblem p;
  p.z.resize(static_cast<Eigen::Index>(nodes.size()), propagated.cols());
  for (std::size_t i = 0; i < nodes.size(); ++i) p.z.row(static_cast<Eigen::Index>(i)) = propagated.row(nodes[i]);
  p.labels = detail::labels_of(graph, nodes);
  p.weight_decay = weight_decay;
  return p;
}

}  // namespace

SurrogateParams train_surrogate(const TextAttributedGraph& graph, const FeatureMatrix& features,
                                const TrainConfig& cfg, LossTrace* trace) {
  cfg.validate();
  if (features.rows() != graph.node_count()) throw InputError("surrogate: feature rows differ from node count");
  const SurrogateProblem problem = make_problem(graph, features, cfg.weight_decay);

  Rng rng(derive_seed(cfg.seed, "surrogate.init"));
  Matrix w(features.dim(), graph.num_classes());
  for (Eigen::Index c = 0; c < w.cols(); ++c)
    for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = 0.01 * rng.normal();

  double step = cfg.learning_rate;
  Matrix grad;
  double loss = problem.loss(w, &grad);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (!std::isfinite(loss)) throw NumericError(fmt::format("surrogate: non-finite loss at epoch {}", epoch));
    if (trace) trace->push_back(loss);
    for (int attempt = 0; attempt < 60; ++attempt) {
      Matrix candidate = w - step * grad;
      Matrix candidate_grad;
      const double candidate_loss = problem.loss(candidate, &candidate_grad);
      if (std::isfinite(candidate_loss) && candidate_loss <= loss) {
        w = std::move(candidate);
        grad = std::move(candidate_grad);
        loss = candidate_loss;
        break;
      }
      step *= 0.5;
    }
  }
  if (trace) trace->push_back(loss);
  return {std::move(w), features.config_digest};
}

Matrix surrogate_logits(const SurrogateParams& params, const SparseMatrix& a_hat, const Matrix& x) {
  if (x.cols() != params.w.rows()) throw InputError("surrogate: feature width differs from the trained weights");
  return a_hat * (a_hat * (x * params.w));
}

namespace detail {

double surrogate_objective(const SurrogateParams& params, const TextAttributedGraph& graph,
                           const FeatureMatrix& features, double weight_decay, std::vector<double>* grad) {
  const SurrogateProblem problem = make_problem(graph, features, weight_decay);
  Matrix g;
  const double loss = problem.loss(params.w, grad ? &g : nullptr);
  if (grad) {
    grad->clear();
    append(*grad, g);
  }
  return loss;
}

}  // namespace detail
}  // namespace tagraid
