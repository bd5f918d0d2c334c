#include <cmath>

#include <fmt/format.h>

#include "tagraid/error.hpp"
#include "tagraid/rng.hpp"
#include "victims_internal.hpp"

namespace tagraid {

namespace {

NeighborFilter cosine_filter(const FeatureMatrix& features, std::optional<double> threshold) {
  if (!threshold) return {};
  const double t = *threshold;
  const Matrix* x = &features.values;
  return [x, t](NodeId parent, NodeId child) {
    return cosine(x->row(parent).transpose(), x->row(child).transpose()) >= t;
  };
}

ComputationTree tree_for(const SequenceVictimParams& params, const TextAttributedGraph& graph,
                         const FeatureMatrix& features, NodeId u, const TextAttributedGraph* reference) {
  return build_tree(graph, u, params.tree, params.template_seed, reference,
                    cosine_filter(features, params.tree_filter));
}

void check_shape(const SequenceVictimParams& params, const FeatureMatrix& features) {
  const auto positions = static_cast<Eigen::Index>(tree_positions(params.tree.depth, params.tree.fanout));
  const Eigen::Index expected =
      positions * features.dim() + (params.m_global ? params.m_global->size() : 0);
  if (params.projector.w1.rows() != expected || params.placeholder.size() != features.dim()) {
    throw InputError(fmt::format("sequence victim: projector expects {} inputs, features give {}",
                                 params.projector.w1.rows(), expected));
  }
}

}  // namespace

Matrix positional_rows(int depth, int fanout, int dim) {
  const auto positions = static_cast<int>(tree_positions(depth, fanout));
  const int width = std::min(positions, dim);
  Matrix out = Matrix::Zero(positions, dim);
  out.leftCols(width) = laplacian_pe(depth, fanout, width);
  return out;
}

Vector sequence_input(const SequenceVictimParams& params, const TextAttributedGraph& graph,
                      const FeatureMatrix& features, NodeId u, const EvalOptions& opts) {
  const Matrix pe = positional_rows(params.tree.depth, params.tree.fanout, features.dim());
  const auto tree = tree_for(params, graph, features, u, opts.reference);
  Vector seq = node_sequence(tree, features, params.placeholder, pe, params.pe_weight);
  if (!params.m_global) return seq;
  Vector full(seq.size() + params.m_global->size());
  full << seq, *params.m_global;
  return full;
}

namespace detail {

SequenceObjective::SequenceObjective(const SequenceVictimParams& shape, const TextAttributedGraph& graph,
                                     const FeatureMatrix& features, std::span<const NodeId> nodes,
                                     double weight_decay)
    : labels_(labels_of(graph, nodes)), weight_decay_(weight_decay), dim_(features.dim()) {
  check_shape(shape, features);
  const auto positions = static_cast<Eigen::Index>(tree_positions(shape.tree.depth, shape.tree.fanout));
  const auto n = static_cast<Eigen::Index>(nodes.size());
  fixed_ = Matrix::Zero(n, positions * dim_);
  mask_ = Matrix::Zero(n, positions);
  pe_ = positional_rows(shape.tree.depth, shape.tree.fanout, dim_);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto tree = tree_for(shape, graph, features, nodes[static_cast<std::size_t>(i)], nullptr);
    for (Eigen::Index p = 0; p < positions; ++p) {
      const NodeId v = tree.slots[static_cast<std::size_t>(p)];
      if (v == ComputationTree::kPlaceholder) {
        mask_(i, p) = 1.0;
      } else {
        fixed_.block(i, p * dim_, 1, dim_) = features.values.row(v);
      }
    }
  }
}

double SequenceObjective::operator()(const SequenceVictimParams& params, std::vector<double>* grad) const {
  const auto positions = mask_.cols();
  const Eigen::Index dim = dim_;
  const Mlp& mlp = params.projector;
  const auto hidden_width = mlp.w1.cols();
  const auto top = mlp.w1.topRows(positions * dim);

  // Per-position projections of the placeholder and PE rows.
  Matrix ph_proj(positions, hidden_width);
  Vector constant = mlp.b1;
  for (Eigen::Index p = 0; p < positions; ++p) {
    const auto block = mlp.w1.middleRows(p * dim, dim);
    ph_proj.row(p) = params.placeholder.transpose() * block;
    constant += params.pe_weight * (pe_.row(p) * block).transpose();
  }
  if (params.m_global) {
    constant += (params.m_global->transpose() * mlp.w1.bottomRows(params.m_global->size())).transpose();
  }

  Matrix z = fixed_ * top + mask_ * ph_proj;
  z.rowwise() += constant.transpose();
  const Matrix hidden = z.array().tanh().matrix();
  const Matrix logits = (hidden * mlp.w2).rowwise() + mlp.b2.transpose();

  Matrix d_logits;
  double loss = softmax_cross_entropy(logits, labels_, grad ? &d_logits : nullptr);
  loss += 0.5 * weight_decay_ * (mlp.w1.squaredNorm() + mlp.w2.squaredNorm());
  if (!grad) return loss;

  const Matrix d_w2 = hidden.transpose() * d_logits + weight_decay_ * mlp.w2;
  const Vector d_b2 = d_logits.colwise().sum().transpose();
  const Matrix d_z = ((d_logits * mlp.w2.transpose()).array() * (1.0 - hidden.array().square())).matrix();
  const Vector col_sum = d_z.colwise().sum().transpose();
  const Matrix masked = mask_.transpose() * d_z;  // positions x hidden

  Matrix d_w1 = weight_decay_ * mlp.w1;
  d_w1.topRows(positions * dim).noalias() += fixed_.transpose() * d_z;
  Vector d_placeholder = Vector::Zero(dim);
  double d_pe_weight = 0.0;
  for (Eigen::Index p = 0; p < positions; ++p) {
    auto block_grad = d_w1.middleRows(p * dim, dim);
    block_grad.noalias() += params.placeholder * masked.row(p);
    block_grad.noalias() += params.pe_weight * pe_.row(p).transpose() * col_sum.transpose();
    const auto block = mlp.w1.middleRows(p * dim, dim);
    d_placeholder.noalias() += block * masked.row(p).transpose();
    d_pe_weight += pe_.row(p) * (block * col_sum);
  }
  Vector d_m_global;
  if (params.m_global) {
    const auto width = params.m_global->size();
    d_w1.bottomRows(width).noalias() += *params.m_global * col_sum.transpose();
    d_m_global = mlp.w1.bottomRows(width) * col_sum;
  }

  grad->clear();
  grad->reserve(static_cast<std::size_t>(mlp.w1.size() + mlp.w2.size()) + 4 * static_cast<std::size_t>(dim));
  append(*grad, d_placeholder);
  grad->push_back(d_pe_weight);
  append(*grad, d_w1);
  append(*grad, col_sum);
  append(*grad, d_w2);
  append(*grad, d_b2);
  if (params.m_global) append(*grad, d_m_global);
  return loss;
}

}  // namespace detail

SequenceVictimParams train_sequence_victim(const TextAttributedGraph& graph, const FeatureMatrix& features,
                                           const SequenceTrainOptions& opts, const TrainConfig& cfg,
                                           LossTrace* trace) {
  cfg.validate();
  if (features.rows() != graph.node_count()) throw InputError("sequence victim: feature rows differ from node count");
  const auto positions = static_cast<int>(tree_positions(opts.tree.depth, opts.tree.fanout));
  const int dim = features.dim();

  SequenceVictimParams params;
  params.tree = opts.tree;
  params.template_seed = opts.template_seed;
  params.tree_filter = opts.tree_filter;
  params.feature_digest = features.config_digest;
  Rng rng(derive_seed(cfg.seed, "sequence.init"));
  params.placeholder = Vector(dim);
  for (auto& v : params.placeholder) v = rng.normal() / std::sqrt(static_cast<double>(dim));
  params.pe_weight = 0.1;
  if (opts.m_global_dim < 0) throw InputError("sequence victim: m_global_dim must be >= 0");
  const int inputs = positions * dim + opts.m_global_dim;
  params.projector = Mlp::init(inputs, cfg.hidden, graph.num_classes(), derive_seed(cfg.seed, "sequence.mlp"));
  if (opts.m_global_dim > 0) params.m_global = Vector::Zero(opts.m_global_dim);

  const auto nodes = detail::train_nodes(graph);
  const detail::SequenceObjective objective(params, graph, features, nodes, cfg.weight_decay);
  auto flat = flatten(params);
  const VictimParams shape = params;
  detail::adam_minimize(
      flat, cfg.epochs, cfg.learning_rate,
      [&](std::span<const double> values, std::vector<double>& grad) {
        const auto current = std::get<SequenceVictimParams>(unflatten(shape, values));
        return objective(current, &grad);
      },
      trace, "sequence victim");
  return std::get<SequenceVictimParams>(unflatten(shape, flat));
}

}  // namespace tagraid
