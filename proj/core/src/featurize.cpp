#include "tagraid/featurize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "parallel.hpp"
#include "tagraid/rng.hpp"
#include "tagraid/error.hpp"
#include "tagraid/utf8.hpp"

namespace tagraid {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline std::uint64_t fnv_word(std::uint64_t h, std::uint64_t word, int bytes) noexcept {
  for (int i = 0; i < bytes; ++i) {
    h ^= (word >> (8 * i)) & 0xffU;
    h *= kFnvPrime;
  }
  return h;
}

template <typename Fn>
void for_each_gram(const std::u32string& cps, int n, std::uint64_t seed, int dim, Fn&& fn) {
  const std::uint64_t base = fnv_word(kFnvOffset, seed, 8);
  const std::size_t len = cps.size();
  const std::size_t width = std::min<std::size_t>(static_cast<std::size_t>(n), len);
  for (std::size_t i = 0; i + width <= len; ++i) {
    std::uint64_t h = base;
    for (std::size_t j = 0; j < width; ++j) h = fnv_word(h, cps[i + j], 4);
    fn(static_cast<std::uint32_t>(h % static_cast<std::uint64_t>(dim)));
  }
}

}  // namespace

void FeaturizerConfig::validate() const {
  if (dim < 16) throw InputError(fmt::format("featurizer: dim must be >= 16 (got {})", dim));
  if (ngram < 2) throw InputError(fmt::format("featurizer: ngram must be >= 2 (got {})", ngram));
}

std::uint64_t FeaturizerConfig::digest() const noexcept {
  std::uint64_t h = fnv1a64("hash-ngram-v1");
  h = fnv_word(h, static_cast<std::uint64_t>(dim), 8);
  h = fnv_word(h, static_cast<std::uint64_t>(ngram), 8);
  return fnv_word(h, seed, 8);
}

Vector hash_embed(std::string_view text, int dim, int n, std::uint64_t seed, bool* empty) {
  FeaturizerConfig{dim, n, seed}.validate();
  Vector out = Vector::Zero(dim);
  const auto cps = utf8::decode(text);
  if (empty) *empty = cps.empty();
  if (cps.empty()) return out;
  for_each_gram(cps, n, seed, dim, [&](std::uint32_t b) { out[b] += 1.0; });
  out /= out.norm();
  return out;
}

Vector hash_embed(std::string_view text, const FeaturizerConfig& cfg, bool* empty) {
  return hash_embed(text, cfg.dim, cfg.ngram, cfg.seed, empty);
}

std::vector<std::uint32_t> ngram_stream(std::string_view text, const FeaturizerConfig& cfg) {
  std::vector<std::uint32_t> out;
  const auto cps = utf8::decode(text);
  out.reserve(cps.size());
  for_each_gram(cps, cfg.ngram, cfg.seed, cfg.dim, [&](std::uint32_t b) { out.push_back(b); });
  return out;
}

FeatureMatrix embed_texts(std::span<const std::string> texts, const FeaturizerConfig& cfg) {
  cfg.validate();
  FeatureMatrix fm;
  fm.config_digest = cfg.digest();
  fm.values = Matrix::Zero(static_cast<Eigen::Index>(texts.size()), cfg.dim);
  std::vector<char> empty(texts.size(), 0);
  detail::parallel_for(texts.size(), [&](std::size_t i) {
    bool e = false;
    fm.values.row(static_cast<Eigen::Index>(i)) = hash_embed(texts[i], cfg, &e).transpose();
    empty[i] = e ? 1 : 0;
  });
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (empty[i]) fm.empty_rows.push_back(static_cast<NodeId>(i));
  }
  return fm;
}

FeatureMatrix embed_all(const TextAttributedGraph& graph, const FeaturizerConfig& cfg) {
  return embed_texts(graph.texts(), cfg);
}

SparseMatrix normalized_adjacency(const TextAttributedGraph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.node_count());
  std::vector<double> inv_sqrt(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    inv_sqrt[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(1.0 + static_cast<double>(graph.degree(static_cast<NodeId>(i))));
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) + 2 * graph.edge_count());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double si = inv_sqrt[static_cast<std::size_t>(i)];
    triplets.emplace_back(i, i, si * si);
    for (NodeId j : graph.neighbors(static_cast<NodeId>(i))) {
      triplets.emplace_back(i, j, si * inv_sqrt[static_cast<std::size_t>(j)]);
    }
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

double cosine(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b, bool* zero) {
  if (a.size() != b.size()) {
    throw InputError(fmt::format("cosine: dimension mismatch ({} vs {})", a.size(), b.size()));
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (zero) *zero = (na == 0.0 || nb == 0.0);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

std::size_t tree_positions(int d, int k) {
  if (d < 1 || k < 1) throw InputError(fmt::format("tree shape needs d >= 1 and k >= 1 (got d={}, k={})", d, k));
  std::size_t total = 1;
  std::size_t level = 1;
  for (int i = 0; i < d; ++i) {
    level *= static_cast<std::size_t>(k);
    total += level;
  }
  return total;
}

Matrix laplacian_pe(int d, int k, int dim) {
  const std::size_t p = tree_positions(d, k);
  if (dim < 1 || static_cast<std::size_t>(dim) > p) {
    throw InputError(fmt::format("laplacian_pe: dim {} outside [1, {}]", dim, p));
  }
  const auto n = static_cast<Eigen::Index>(p);
  Matrix adj = Matrix::Zero(n, n);
  for (Eigen::Index c = 1; c < n; ++c) {
    const Eigen::Index parent = (c - 1) / k;
    adj(parent, c) = adj(c, parent) = 1.0;
  }
  const Vector deg = adj.rowwise().sum();
  const Vector inv_sqrt = deg.array().rsqrt();
  Matrix lap = Matrix::Identity(n, n) - inv_sqrt.asDiagonal() * adj * inv_sqrt.asDiagonal();

  Eigen::SelfAdjointEigenSolver<Matrix> solver(lap);
  if (solver.info() != Eigen::Success) throw NumericError("laplacian_pe: eigensolver failed");
  const Vector& values = solver.eigenvalues();
  const Matrix& vectors = solver.eigenvectors();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  constexpr double kZero = 1e-9;
  std::stable_partition(order.begin(), order.end(), [&](Eigen::Index i) { return values[i] > kZero; });

  Matrix out(n, dim);
  for (int c = 0; c < dim; ++c) {
    Vector v = vectors.col(order[static_cast<std::size_t>(c)]);
    for (Eigen::Index r = 0; r < n; ++r) {
      if (std::abs(v[r]) > kZero) {
        if (v[r] < 0) v = -v;
        break;
      }
    }
    out.col(c) = v;
  }
  return out;
}

}  // namespace tagraid
