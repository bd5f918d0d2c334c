#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "tagraid/error.hpp"
#include "tagraid/rng.hpp"
#include "victims_internal.hpp"

namespace tagraid {

void TrainConfig::validate() const {
  if (epochs < 1) throw InputError(fmt::format("train: epochs must be >= 1 (got {})", epochs));
  if (!(learning_rate > 0.0)) throw InputError(fmt::format("train: learning_rate must be > 0 (got {})", learning_rate));
  if (hidden < 1) throw InputError(fmt::format("train: hidden width must be >= 1 (got {})", hidden));
  if (weight_decay < 0.0) throw InputError("train: weight_decay must be >= 0");
}

Mlp Mlp::init(int in, int hidden, int out, std::uint64_t seed) {
  Rng rng(seed);
  auto glorot = [&](int rows, int cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(rows, cols);
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-limit, limit);
    return m;
  };
  Mlp mlp;
  mlp.w1 = glorot(in, hidden);
  mlp.b1 = Vector::Zero(hidden);
  mlp.w2 = glorot(hidden, out);
  mlp.b2 = Vector::Zero(out);
  return mlp;
}

Matrix Mlp::forward(const Matrix& x) const {
  return (detail::mlp_hidden(*this, x) * w2).rowwise() + b2.transpose();
}

std::string_view to_string(VictimKind kind) {
  switch (kind) {
    case VictimKind::Surrogate: return "surrogate";
    case VictimKind::Sequence: return "sequence";
    case VictimKind::Gnn: return "gnn";
  }
  return "unknown";
}

VictimKind victim_kind_from(std::string_view name) {
  if (name == "surrogate") return VictimKind::Surrogate;
  if (name == "sequence") return VictimKind::Sequence;
  if (name == "gnn") return VictimKind::Gnn;
  throw InputError(fmt::format("unknown victim kind \"{}\"", name));
}

VictimKind kind_of(const VictimParams& params) noexcept {
  return static_cast<VictimKind>(params.index());
}

std::vector<int> predict(const Matrix& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c) {
      if (logits(r, c) > logits(r, best)) best = c;
    }
    out[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

namespace detail {

Matrix softmax_rows(const Matrix& logits) {
  Matrix p = logits;
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    const double m = p.row(r).maxCoeff();
    p.row(r) = (p.row(r).array() - m).exp();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

double softmax_cross_entropy(const Matrix& logits, std::span<const int> labels, Matrix* grad) {
  const auto n = logits.rows();
  if (n == 0) {
    if (grad) *grad = Matrix::Zero(0, logits.cols());
    return 0.0;
  }
  double loss = 0.0;
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    const double m = logits.row(r).maxCoeff();
    const auto shifted = (logits.row(r).array() - m).eval();
    const double lse = std::log(shifted.exp().sum());
    loss -= shifted(labels[static_cast<std::size_t>(r)]) - lse;
    p.row(r) = (shifted - lse).exp();
  }
  loss /= static_cast<double>(n);
  if (grad) {
    for (Eigen::Index r = 0; r < n; ++r) p(r, labels[static_cast<std::size_t>(r)]) -= 1.0;
    *grad = p / static_cast<double>(n);
  }
  return loss;
}

Matrix mlp_hidden(const Mlp& mlp, const Matrix& x) {
  Matrix z = x * mlp.w1;
  z.rowwise() += mlp.b1.transpose();
  return z.array().tanh().matrix();
}

void mlp_backward(const Mlp& mlp, const Matrix& x, const Matrix& hidden, const Matrix& d_logits, MlpGrad& grad,
                  Matrix* d_input) {
  grad.w2 = hidden.transpose() * d_logits;
  grad.b2 = d_logits.colwise().sum().transpose();
  const Matrix d_z = ((d_logits * mlp.w2.transpose()).array() * (1.0 - hidden.array().square())).matrix();
  grad.w1 = x.transpose() * d_z;
  grad.b1 = d_z.colwise().sum().transpose();
  if (d_input) *d_input = d_z * mlp.w1.transpose();
}

void adam_minimize(std::vector<double>& params, int epochs, double lr,
                   const std::function<double(std::span<const double>, std::vector<double>&)>& objective,
                   LossTrace* trace, const char* what) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  std::vector<double> m(params.size(), 0.0), v(params.size(), 0.0), grad;
  double b1t = 1.0, b2t = 1.0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double loss = objective(params, grad);
    if (!std::isfinite(loss)) {
      throw NumericError(fmt::format("{}: non-finite training loss at epoch {}", what, epoch));
    }
    if (trace) trace->push_back(loss);
    b1t *= kBeta1;
    b2t *= kBeta2;
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      const double mh = m[i] / (1.0 - b1t);
      const double vh = v[i] / (1.0 - b2t);
      params[i] -= lr * mh / (std::sqrt(vh) + kEps);
    }
  }
}

void append(std::vector<double>& out, const Matrix& m) {
  out.insert(out.end(), m.data(), m.data() + m.size());
}

void append(std::vector<double>& out, const Vector& v) {
  out.insert(out.end(), v.data(), v.data() + v.size());
}

void read_into(std::span<const double>& in, Matrix& m) {
  const auto n = static_cast<std::size_t>(m.size());
  if (in.size() < n) throw InputError("parameter vector too short");
  std::copy_n(in.data(), n, m.data());
  in = in.subspan(n);
}

void read_into(std::span<const double>& in, Vector& v) {
  const auto n = static_cast<std::size_t>(v.size());
  if (in.size() < n) throw InputError("parameter vector too short");
  std::copy_n(in.data(), n, v.data());
  in = in.subspan(n);
}

void append(std::vector<double>& out, const Mlp& mlp) {
  append(out, mlp.w1);
  append(out, mlp.b1);
  append(out, mlp.w2);
  append(out, mlp.b2);
}

void read_into(std::span<const double>& in, Mlp& mlp) {
  read_into(in, mlp.w1);
  read_into(in, mlp.b1);
  read_into(in, mlp.w2);
  read_into(in, mlp.b2);
}

void append(std::vector<double>& out, const MlpGrad& g) {
  append(out, g.w1);
  append(out, g.b1);
  append(out, g.w2);
  append(out, g.b2);
}

std::vector<int> labels_of(const TextAttributedGraph& graph, std::span<const NodeId> nodes) {
  std::vector<int> out;
  out.reserve(nodes.size());
  for (NodeId v : nodes) out.push_back(graph.label(v));
  return out;
}

std::vector<NodeId> train_nodes(const TextAttributedGraph& graph) {
  auto nodes = graph.nodes_with(SplitTag::Train);
  if (nodes.empty()) throw InputError("training needs a non-empty train split");
  return nodes;
}

void check_digest(std::uint64_t expected, const FeatureMatrix& features, const char* what) {
  if (expected != features.config_digest) {
    throw InputError(fmt::format("{}: features were produced by a different featurizer configuration "
                                 "(digest {:016x}, expected {:016x})",
                                 what, features.config_digest, expected));
  }
}

}  // namespace detail
}  // namespace tagraid
