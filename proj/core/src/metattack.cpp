#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "tagraid/error.hpp"
#include "tagraid/rng.hpp"
#include "tagraid/struct_attack.hpp"
#include "victims_internal.hpp"

namespace tagraid {

namespace {

// A_hat = D^-1/2 (A + I) D^-1/2 for a real-valued adjacency.
struct Normalized {
  SparseMatrix a_hat;
  Vector degree;
};

Normalized normalize(const Matrix& a) {
  const Eigen::Index n = a.rows();
  Normalized out;
  out.degree = Vector::Ones(n) + a.rowwise().sum();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(out.degree(i) > 0.0)) throw NumericError(fmt::format("metattack: non-positive degree at node {}", i));
  }
  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = i == j ? 1.0 : a(i, j);
      if (w != 0.0) triplets.emplace_back(i, j, w / std::sqrt(out.degree(i) * out.degree(j)));
    }
  }
  out.a_hat.resize(n, n);
  out.a_hat.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

// Cotangent of the attacker loss w.r.t. A_hat, kept as L R^T.
struct LowRank {
  std::vector<Matrix> left;
  std::vector<Matrix> right;

  void add(Matrix l, Matrix r) {
    left.push_back(std::move(l));
    right.push_back(std::move(r));
  }

  Matrix dense(Eigen::Index n) const {
    Eigen::Index k = 0;
    for (const auto& m : left) k += m.cols();
    Matrix l(n, k), r(n, k);
    Eigen::Index at = 0;
    for (std::size_t i = 0; i < left.size(); ++i) {
      l.middleCols(at, left[i].cols()) = left[i];
      r.middleCols(at, right[i].cols()) = right[i];
      at += left[i].cols();
    }
    return l * r.transpose();
  }
};

struct Step {
  Matrix h, m1, p, g, b1;
};

}  // namespace

void MetattackConfig::validate() const {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw InputError("metattack: fraction must be in [0, 1]");
  if (unroll_t < 1) throw InputError(fmt::format("metattack: unroll_t must be >= 1 (got {})", unroll_t));
  if (!(inner_lr > 0.0)) throw InputError("metattack: inner_lr must be positive");
  if (!(weight_decay >= 0.0)) throw InputError("metattack: weight_decay must be >= 0");
  surrogate.validate();
}

Matrix dense_adjacency(const TextAttributedGraph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.node_count());
  Matrix a = Matrix::Zero(n, n);
  for (const auto& e : graph.edges()) {
    a(e.u, e.v) = 1.0;
    a(e.v, e.u) = 1.0;
  }
  return a;
}

MetaProblem make_meta_problem(const TextAttributedGraph& graph, const FeatureMatrix& features,
                              const MetattackConfig& cfg) {
  cfg.validate();
  if (features.rows() != graph.node_count()) throw InputError("metattack: feature rows differ from node count");
  MetaProblem p;
  p.x = features.values;
  p.num_classes = graph.num_classes();
  p.train = detail::train_nodes(graph);
  if (p.train.empty()) throw InputError("metattack: graph has no train nodes");
  p.train_labels = detail::labels_of(graph, p.train);
  p.unroll_t = cfg.unroll_t;
  p.inner_lr = cfg.inner_lr;
  p.weight_decay = cfg.weight_decay;

  p.attack_labels.assign(graph.node_count(), -1);
  for (std::size_t i = 0; i < p.train.size(); ++i) p.attack_labels[static_cast<std::size_t>(p.train[i])] = p.train_labels[i];
  p.attack_weights.assign(graph.node_count(), 0.0);
  for (const auto u : p.train) p.attack_weights[static_cast<std::size_t>(u)] = 1.0 / static_cast<double>(p.train.size());
  const std::size_t unlabeled = graph.node_count() - p.train.size();
  if (cfg.self_training && unlabeled > 0) {
    const SurrogateParams clean = train_surrogate(graph, features, cfg.surrogate);
    const auto pred = predict(surrogate_logits(clean, normalized_adjacency(graph), features.values));
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (p.attack_labels[i] >= 0) continue;
      p.attack_labels[i] = pred[i];
      p.attack_weights[i] = 1.0 / static_cast<double>(unlabeled);
    }
  }

  Rng rng(derive_seed(cfg.seed, "metattack.w0"));
  const double scale = std::sqrt(6.0 / static_cast<double>(features.dim() + p.num_classes));
  p.w0.resize(features.dim(), p.num_classes);
  for (Eigen::Index c = 0; c < p.w0.cols(); ++c)
    for (Eigen::Index r = 0; r < p.w0.rows(); ++r) p.w0(r, c) = rng.uniform(-scale, scale);
  return p;
}

double meta_gradient(const MetaProblem& problem, const Matrix& adjacency, Matrix* grad) {
  const Eigen::Index n = adjacency.rows();
  if (adjacency.cols() != n || problem.x.rows() != n) throw InputError("metattack: adjacency shape mismatch");
  const Normalized norm = normalize(adjacency);
  const SparseMatrix& a_hat = norm.a_hat;
  const double eta = problem.inner_lr;
  const double decay = 1.0 - eta * problem.weight_decay;
  const double inv_train = 1.0 / static_cast<double>(problem.train.size());

  std::vector<Step> steps(static_cast<std::size_t>(problem.unroll_t));
  Matrix w = problem.w0;
  for (auto& s : steps) {
    s.h = problem.x * w;
    s.m1 = a_hat * s.h;
    s.p = detail::softmax_rows(a_hat * s.m1);
    s.g = Matrix::Zero(n, problem.num_classes);
    for (std::size_t i = 0; i < problem.train.size(); ++i) {
      const auto r = problem.train[i];
      s.g.row(r) = s.p.row(r) * inv_train;
      s.g(r, problem.train_labels[i]) -= inv_train;
    }
    s.b1 = a_hat * s.g;
    w = decay * w - eta * (problem.x.transpose() * (a_hat * s.b1));
  }

  const Matrix h = problem.x * w;
  const Matrix m1 = a_hat * h;
  const Matrix p = detail::softmax_rows(a_hat * m1);
  if (problem.attack_labels.size() != static_cast<std::size_t>(n) ||
      problem.attack_weights.size() != static_cast<std::size_t>(n)) {
    throw InputError("metattack: attacker labels and weights must cover every node");
  }
  double loss = 0.0;
  Matrix z_bar = Matrix::Zero(n, problem.num_classes);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = problem.attack_labels[static_cast<std::size_t>(i)];
    const double weight = problem.attack_weights[static_cast<std::size_t>(i)];
    if (y < 0 || weight == 0.0) continue;
    loss -= weight * std::log(std::max(p(i, y), 1e-300));
    z_bar.row(i) = weight * p.row(i);
    z_bar(i, y) -= weight;
  }
  if (!grad) return loss;

  LowRank cot;
  Matrix m1_bar = a_hat * z_bar;
  cot.add(z_bar, m1);
  cot.add(m1_bar, h);
  Matrix w_bar = problem.x.transpose() * (a_hat * m1_bar);

  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    const Step& s = *it;
    const Matrix b2_bar = -eta * (problem.x * w_bar);
    const Matrix b1_bar = a_hat * b2_bar;
    cot.add(b2_bar, s.b1);
    cot.add(b1_bar, s.g);
    const Matrix g_bar = a_hat * b1_bar;
    Matrix p_bar = Matrix::Zero(n, problem.num_classes);
    for (const auto r : problem.train) p_bar.row(r) = g_bar.row(r) * inv_train;
    const Vector dot = (p_bar.array() * s.p.array()).rowwise().sum();
    const Matrix zt_bar = (s.p.array() * (p_bar.colwise() - dot).array()).matrix();
    const Matrix m1t_bar = a_hat * zt_bar;
    cot.add(zt_bar, s.m1);
    cot.add(m1t_bar, s.h);
    w_bar = decay * w_bar + problem.x.transpose() * (a_hat * m1t_bar);
  }

  const Matrix m = cot.dense(n);
  Vector gamma = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (SparseMatrix::InnerIterator e(a_hat, i); e; ++e) acc += (m(i, e.col()) + m(e.col(), i)) * e.value();
    gamma(i) = -acc / (2.0 * norm.degree(i));
  }
  grad->resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      (*grad)(i, j) = i == j ? 0.0
                             : (m(i, j) + m(j, i)) / std::sqrt(norm.degree(i) * norm.degree(j)) + gamma(i) + gamma(j);
    }
  }
  return loss;
}

EdgeFlip best_meta_flip(const Matrix& grad, const Matrix& adjacency, std::span<const Edge> excluded, double* score) {
  const Eigen::Index n = grad.rows();
  std::size_t next_excluded = 0;
  bool found = false;
  double best = 0.0;
  EdgeFlip flip;
  // Column u of the symmetric matrices holds row u, so scan columns.
  for (Eigen::Index u = 0; u < n; ++u) {
    for (Eigen::Index v = u + 1; v < n; ++v) {
      const Edge e{static_cast<NodeId>(u), static_cast<NodeId>(v)};
      while (next_excluded < excluded.size() && excluded[next_excluded] < e) ++next_excluded;
      if (next_excluded < excluded.size() && excluded[next_excluded] == e) continue;
      const double a = adjacency(v, u);
      const double s = grad(v, u) * (1.0 - 2.0 * a);
      if (!found || s > best) {
        found = true;
        best = s;
        flip = {e.u, e.v, a > 0.5 ? FlipOp::Remove : FlipOp::Add};
      }
    }
  }
  if (!found) throw InputError("metattack: no feasible pair left");
  if (score) *score = best;
  return flip;
}

PerturbationSet metattack(const TextAttributedGraph& graph, const FeatureMatrix& features, const MetattackConfig& cfg,
                          MetattackTrace* trace) {
  const MetaProblem problem = make_meta_problem(graph, features, cfg);
  PerturbationSet out;
  out.edge_budget = edge_budget(graph, cfg.fraction);
  const auto n = static_cast<std::int64_t>(graph.node_count());
  const std::int64_t pairs = n * (n - 1) / 2;
  Matrix a = dense_adjacency(graph);
  std::vector<Edge> committed;
  Matrix grad;
  for (std::int64_t it = 0; it < std::min(out.edge_budget, pairs); ++it) {
    const double loss = meta_gradient(problem, a, &grad);
    if (!std::isfinite(loss) || !grad.allFinite()) {
      throw NumericError(fmt::format("metattack: non-finite meta-gradient at iteration {}", it));
    }
    double score = 0.0;
    const EdgeFlip flip = best_meta_flip(grad, a, committed, &score);
    if (trace) {
      trace->losses.push_back(loss);
      trace->scores.push_back(score);
    }
    const double value = flip.op == FlipOp::Add ? 1.0 : 0.0;
    a(flip.u, flip.v) = value;
    a(flip.v, flip.u) = value;
    const Edge e{flip.u, flip.v};
    committed.insert(std::lower_bound(committed.begin(), committed.end(), e), e);
    out.flips.push_back(flip);
  }
  return out;
}

}  // namespace tagraid
