#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "tagraid/graph.hpp"

namespace tagraid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Character n-gram hashing embedder. Stands in for a frozen text encoder.
struct FeaturizerConfig {
  int dim = 512;
  int ngram = 3;
  std::uint64_t seed = 0x7461672d72616964ULL;

  void validate() const;
  /// Stable 64-bit digest of every field; victims record it so they refuse
  /// to run on features produced under another configuration.
  std::uint64_t digest() const noexcept;
};

/// Row i holds the embedding of node i's text.
struct FeatureMatrix {
  Matrix values;
  /// Nodes whose text was empty (their row is zero).
  std::vector<NodeId> empty_rows;
  std::uint64_t config_digest = 0;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
  int dim() const noexcept { return static_cast<int>(values.cols()); }
};

/// Hashed n-gram counts, L2 normalised. Hashes codepoints with FNV-1a 64
/// (seed and codepoints fed as little-endian words), so the result is
/// identical on every platform. An empty text yields the zero vector and
/// sets *empty.
Vector hash_embed(std::string_view text, int dim, int n, std::uint64_t seed, bool* empty = nullptr);
Vector hash_embed(std::string_view text, const FeaturizerConfig& cfg, bool* empty = nullptr);

/// Bucket ids of the text's n-grams in reading order. This is the default
/// black box for the text attack: its output changes exactly when the
/// embedder's input changes.
std::vector<std::uint32_t> ngram_stream(std::string_view text, const FeaturizerConfig& cfg);

FeatureMatrix embed_texts(std::span<const std::string> texts, const FeaturizerConfig& cfg);
FeatureMatrix embed_all(const TextAttributedGraph& graph, const FeaturizerConfig& cfg);

/// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
SparseMatrix normalized_adjacency(const TextAttributedGraph& graph);

/// Cosine similarity. A zero vector on either side gives 0 and sets *zero.
double cosine(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b, bool* zero = nullptr);

/// Number of slots in a (d, k) template tree: 1 + k + ... + k^d.
std::size_t tree_positions(int d, int k);

/// Eigenvectors of the normalised Laplacian of the (d, k) template tree as
/// columns (positions x dim): smallest non-zero eigenvalue first, zero
/// eigenvalues last, each column signed so its first non-zero entry is
/// positive.
Matrix laplacian_pe(int d, int k, int dim);

}  // namespace tagraid
