#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "tagraid/error.hpp"
#include "tagraid/galguard.hpp"
#include "tagraid/rng.hpp"
#include "victims_internal.hpp"

namespace tagraid {

namespace {

constexpr double kLeakySlope = 0.2;

inline double leaky(double x) noexcept { return x > 0.0 ? x : kLeakySlope * x; }

}  // namespace

namespace detail {

GnnObjective::GnnObjective(const GnnVictimParams& shape, const TextAttributedGraph& graph,
                           const FeatureMatrix& features, std::span<const NodeId> nodes, double weight_decay)
    : x_(&features.values), nodes_(nodes.begin(), nodes.end()), labels_(labels_of(graph, nodes)),
      weight_decay_(weight_decay) {
  if (features.rows() != graph.node_count()) throw InputError("gnn victim: feature rows differ from node count");
  if (shape.wa.rows() != features.dim()) throw InputError("gnn victim: feature width differs from the trained weights");
  std::optional<GuardWeights> guard;
  if (shape.guard) guard = guard_weights(features, graph, shape.guard->prune_p0, shape.guard->smoothing_rho);
  hoods_.reserve(nodes_.size());
  for (NodeId u : nodes_) {
    Neighborhood h;
    const auto nb = graph.neighbors(u);
    if (!guard) {
      h.members.push_back(u);
      h.members.insert(h.members.end(), nb.begin(), nb.end());
      h.log_weight.assign(h.members.size(), 0.0);
    } else {
      const auto w = guard->of(u);
      std::size_t surviving = 0;
      for (double x : w) surviving += x > 0.0 ? 1 : 0;
      const double denom = 1.0 + static_cast<double>(surviving);
      h.members.push_back(u);
      h.log_weight.push_back(std::log(1.0 / denom));
      for (std::size_t j = 0; j < nb.size(); ++j) {
        if (w[j] <= 0.0) continue;
        h.members.push_back(nb[j]);
        h.log_weight.push_back(std::log(w[j] * static_cast<double>(surviving) / denom));
      }
    }
    hoods_.push_back(std::move(h));
  }
}

Matrix GnnObjective::logits(const GnnVictimParams& params) const {
  const Matrix p = *x_ * params.wa;
  const Vector fd = p * params.att_dst;
  const Vector fs = p * params.att_src;
  const auto a = params.wa.cols();
  const auto n = static_cast<Eigen::Index>(nodes_.size());
  const Eigen::Index width = a + (params.residual_enabled ? x_->cols() : 0);
  Matrix input(n, width);
  std::vector<double> e;
  for (Eigen::Index i = 0; i < n; ++i) {
    const NodeId u = nodes_[static_cast<std::size_t>(i)];
    const auto& h = hoods_[static_cast<std::size_t>(i)];
    e.resize(h.members.size());
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < e.size(); ++j) {
      e[j] = leaky(fd[u] + fs[h.members[j]]) + h.log_weight[j];
      m = std::max(m, e[j]);
    }
    double z = 0.0;
    for (auto& v : e) z += (v = std::exp(v - m));
    Vector agg = Vector::Zero(a);
    for (std::size_t j = 0; j < e.size(); ++j) agg += (e[j] / z) * p.row(h.members[j]).transpose();
    input.row(i).head(a) = agg.transpose();
    if (params.residual_enabled) input.row(i).tail(x_->cols()) = params.residual * x_->row(u);
  }
  return params.projector.forward(input);
}

double GnnObjective::operator()(const GnnVictimParams& params, std::vector<double>* grad) const {
  const Matrix p = *x_ * params.wa;
  const Vector fd = p * params.att_dst;
  const Vector fs = p * params.att_src;
  const auto a = params.wa.cols();
  const auto dim = x_->cols();
  const auto n = static_cast<Eigen::Index>(nodes_.size());
  const Eigen::Index width = a + (params.residual_enabled ? dim : 0);

  Matrix input(n, width);
  std::vector<std::vector<double>> alpha(nodes_.size());
  std::vector<std::vector<double>> pre(nodes_.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const NodeId u = nodes_[si];
    const auto& h = hoods_[si];
    auto& al = alpha[si];
    auto& pr = pre[si];
    al.resize(h.members.size());
    pr.resize(h.members.size());
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < al.size(); ++j) {
      pr[j] = fd[u] + fs[h.members[j]];
      al[j] = leaky(pr[j]) + h.log_weight[j];
      m = std::max(m, al[j]);
    }
    double z = 0.0;
    for (auto& v : al) z += (v = std::exp(v - m));
    Vector agg = Vector::Zero(a);
    for (std::size_t j = 0; j < al.size(); ++j) {
      al[j] /= z;
      agg += al[j] * p.row(h.members[j]).transpose();
    }
    input.row(i).head(a) = agg.transpose();
    if (params.residual_enabled) input.row(i).tail(dim) = params.residual * x_->row(u);
  }

  const Matrix hidden = mlp_hidden(params.projector, input);
  const Matrix out = (hidden * params.projector.w2).rowwise() + params.projector.b2.transpose();
  Matrix d_logits;
  double loss = softmax_cross_entropy(out, labels_, grad ? &d_logits : nullptr);
  loss += 0.5 * weight_decay_ *
          (params.wa.squaredNorm() + params.projector.w1.squaredNorm() + params.projector.w2.squaredNorm());
  if (!grad) return loss;

  MlpGrad mg;
  Matrix d_input;
  mlp_backward(params.projector, input, hidden, d_logits, mg, &d_input);
  mg.w1 += weight_decay_ * params.projector.w1;
  mg.w2 += weight_decay_ * params.projector.w2;

  double d_residual = 0.0;
  Matrix d_p = Matrix::Zero(p.rows(), a);
  Vector d_fd = Vector::Zero(p.rows());
  Vector d_fs = Vector::Zero(p.rows());
  std::vector<double> d_alpha;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const NodeId u = nodes_[si];
    const auto& h = hoods_[si];
    const auto& al = alpha[si];
    if (params.residual_enabled) d_residual += d_input.row(i).tail(dim).dot(x_->row(u));
    const auto d_h = d_input.row(i).head(a);
    d_alpha.resize(al.size());
    double weighted = 0.0;
    for (std::size_t j = 0; j < al.size(); ++j) {
      const NodeId v = h.members[j];
      d_alpha[j] = d_h.dot(p.row(v));
      weighted += al[j] * d_alpha[j];
      d_p.row(v) += al[j] * d_h;
    }
    for (std::size_t j = 0; j < al.size(); ++j) {
      const double de = al[j] * (d_alpha[j] - weighted);
      const double dz = de * (pre[si][j] > 0.0 ? 1.0 : kLeakySlope);
      d_fd[u] += dz;
      d_fs[h.members[j]] += dz;
    }
  }
  const Vector d_att_dst = p.transpose() * d_fd;
  const Vector d_att_src = p.transpose() * d_fs;
  d_p.noalias() += d_fd * params.att_dst.transpose();
  d_p.noalias() += d_fs * params.att_src.transpose();
  const Matrix d_wa = x_->transpose() * d_p + weight_decay_ * params.wa;

  grad->clear();
  append(*grad, d_wa);
  append(*grad, d_att_src);
  append(*grad, d_att_dst);
  grad->push_back(d_residual);
  append(*grad, mg);
  return loss;
}

}  // namespace detail

GnnVictimParams train_gnn_victim(const TextAttributedGraph& graph, const FeatureMatrix& features,
                                 const GnnTrainOptions& opts, const TrainConfig& cfg, LossTrace* trace) {
  cfg.validate();
  if (opts.attention_width < 1) throw InputError("gnn victim: attention width must be >= 1");
  const int dim = features.dim();
  const int a = opts.attention_width;
  Rng rng(derive_seed(cfg.seed, "gnn.init"));
  GnnVictimParams params;
  const double limit = std::sqrt(6.0 / static_cast<double>(dim + a));
  params.wa = Matrix(dim, a);
  for (Eigen::Index c = 0; c < params.wa.cols(); ++c)
    for (Eigen::Index r = 0; r < params.wa.rows(); ++r) params.wa(r, c) = rng.uniform(-limit, limit);
  const double att_limit = std::sqrt(6.0 / static_cast<double>(a + 1));
  params.att_src = Vector(a);
  params.att_dst = Vector(a);
  for (auto& v : params.att_src) v = rng.uniform(-att_limit, att_limit);
  for (auto& v : params.att_dst) v = rng.uniform(-att_limit, att_limit);
  params.residual = 1.0;
  params.residual_enabled = opts.residual;
  params.guard = opts.guard;
  params.feature_digest = features.config_digest;
  params.projector = Mlp::init(a + (opts.residual ? dim : 0), cfg.hidden, graph.num_classes(),
                               derive_seed(cfg.seed, "gnn.mlp"));

  const auto nodes = detail::train_nodes(graph);
  const detail::GnnObjective objective(params, graph, features, nodes, cfg.weight_decay);
  const VictimParams shape = params;
  auto flat = flatten(params);
  detail::adam_minimize(
      flat, cfg.epochs, cfg.learning_rate,
      [&](std::span<const double> values, std::vector<double>& grad) {
        const auto current = std::get<GnnVictimParams>(unflatten(shape, values));
        return objective(current, &grad);
      },
      trace, "gnn victim");
  return std::get<GnnVictimParams>(unflatten(shape, flat));
}

std::vector<double> gnn_attention(const GnnVictimParams& params, const TextAttributedGraph& graph,
                                  const FeatureMatrix& features, NodeId u) {
  const Matrix p = features.values * params.wa;
  const Vector fd = p * params.att_dst;
  const Vector fs = p * params.att_src;
  std::optional<GuardWeights> guard;
  if (params.guard) guard = guard_weights(features, graph, params.guard->prune_p0, params.guard->smoothing_rho);
  const auto nb = graph.neighbors(u);
  std::vector<double> e;
  std::vector<double> omega;
  e.push_back(leaky(fd[u] + fs[u]));
  if (guard) {
    const auto w = guard->of(u);
    std::size_t surviving = 0;
    for (double x : w) surviving += x > 0.0 ? 1 : 0;
    const double denom = 1.0 + static_cast<double>(surviving);
    omega.push_back(1.0 / denom);
    for (std::size_t j = 0; j < nb.size(); ++j) {
      e.push_back(leaky(fd[u] + fs[nb[j]]));
      omega.push_back(w[j] * static_cast<double>(surviving) / denom);
    }
  } else {
    for (NodeId v : nb) e.push_back(leaky(fd[u] + fs[v]));
    omega.assign(e.size(), 1.0);
  }
  double m = -std::numeric_limits<double>::infinity();
  for (double v : e) m = std::max(m, v);
  double z = 0.0;
  for (std::size_t j = 0; j < e.size(); ++j) z += (e[j] = omega[j] * std::exp(e[j] - m));
  for (auto& v : e) v /= z;
  return e;
}

}  // namespace tagraid
