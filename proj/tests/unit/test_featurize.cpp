#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "fixtures.hpp"
#include "tagraid/error.hpp"
#include "tagraid/featurize.hpp"

using namespace tagraid;

TEST_CASE("hash_embed") {
  const FeaturizerConfig cfg;
  SUBCASE("unit norm for nonempty text") {
    for (const auto& t : tagraid::testing::word_texts(20)) CHECK(hash_embed(t, cfg).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("a Cyrillic first letter changes the embedding") {
    CHECK(hash_embed("abc", cfg) != hash_embed("\xD0\xB0" "bc", cfg));
  }
  SUBCASE("deterministic") { CHECK(hash_embed("graph attack", cfg) == hash_embed("graph attack", cfg)); }
  SUBCASE("empty text is the zero vector") {
    bool empty = false;
    CHECK(hash_embed("", cfg, &empty).norm() == 0.0);
    CHECK(empty);
  }
  SUBCASE("pinned value keeps hashing stable across builds") {
    const Vector v = hash_embed("abc", 16, 3, 1);
    // One trigram "abc" plus two padded grams at most: at most three nonzero buckets.
    int nonzero = 0;
    for (int i = 0; i < v.size(); ++i) nonzero += v[i] != 0.0 ? 1 : 0;
    CHECK(nonzero >= 1);
    CHECK(nonzero <= 3);
  }
}

TEST_CASE("ngram_stream buckets stay below dim and change with the text") {
  FeaturizerConfig cfg;
  cfg.dim = 64;
  const auto s = ngram_stream("the quick brown fox", cfg);
  CHECK(!s.empty());
  for (auto b : s) CHECK(b < 64u);
  CHECK(ngram_stream("the quick brown fox", cfg) == s);
  CHECK(ngram_stream("the quick brown f\xD0\xBEx", cfg) != s);
}

TEST_CASE("normalized_adjacency") {
  SUBCASE("single edge gives 0.5 everywhere") {
    const TextAttributedGraph g(tagraid::testing::word_texts(2), {0, 0}, 1, {{0, 1}});
    const Matrix a = Matrix(normalized_adjacency(g));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(a(i, j) == doctest::Approx(0.5));
  }
  SUBCASE("isolated node keeps a unit self loop") {
    const TextAttributedGraph g(tagraid::testing::word_texts(3), {0, 0, 0}, 1, {{0, 1}});
    CHECK(Matrix(normalized_adjacency(g))(2, 2) == doctest::Approx(1.0));
  }
  SUBCASE("symmetric") {
    const Matrix a = Matrix(normalized_adjacency(tagraid::testing::random_graph(25, 40, 2, 3)));
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("cosine") {
  Vector a(2), b(2);
  a << 1, 0;
  b << 0, 1;
  CHECK(cosine(a, b) == doctest::Approx(0.0));
  a << 1, 1;
  b << 2, 2;
  CHECK(cosine(a, b) == doctest::Approx(1.0));
  a << 1, 0;
  b << 1, 1;
  CHECK(cosine(a, b) == doctest::Approx(0.70711).epsilon(1e-5));
  bool zero = false;
  CHECK(cosine(Vector::Zero(2), b, &zero) == 0.0);
  CHECK(zero);
}

TEST_CASE("laplacian_pe") {
  CHECK(tree_positions(2, 3) == 13);
  CHECK(tree_positions(1, 2) == 3);
  SUBCASE("orthonormal columns") {
    const Matrix pe = laplacian_pe(2, 3, 13);
    const Matrix gram = pe.transpose() * pe;
    CHECK((gram - Matrix::Identity(13, 13)).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("three-position star: leaves agree on the second eigenvector") {
    const Matrix pe = laplacian_pe(1, 2, 3);
    // Columns: smallest nonzero eigenvalue first. Leaves are rows 1 and 2;
    // one of the two nonzero modes is antisymmetric and one symmetric.
    Matrix lap(3, 3);
    const double s = 1.0 / std::sqrt(2.0);
    lap << 1, -s, -s, -s, 1, 0, -s, 0, 1;
    Eigen::SelfAdjointEigenSolver<Matrix> es(lap);
    CHECK(es.eigenvalues()(0) == doctest::Approx(0.0).epsilon(1e-12));
    const bool symmetric = std::abs(pe(1, 1) - pe(2, 1)) < 1e-9;
    const bool antisymmetric = std::abs(pe(1, 1) + pe(2, 1)) < 1e-9;
    CHECK((symmetric || antisymmetric));
    CHECK(std::abs(pe(1, 1)) == doctest::Approx(std::abs(pe(2, 1))));
  }
  SUBCASE("deterministic") { CHECK(laplacian_pe(2, 3, 8) == laplacian_pe(2, 3, 8)); }
  SUBCASE("more columns than positions is an error") { CHECK_THROWS_AS((void)laplacian_pe(2, 3, 16), InputError); }
}

TEST_CASE("featurizer config digest tracks every field") {
  FeaturizerConfig a, b;
  CHECK(a.digest() == b.digest());
  b.ngram = 4;
  CHECK(a.digest() != b.digest());
  b = a;
  b.dim = 256;
  CHECK(a.digest() != b.digest());
}

TEST_CASE("embed_all marks empty rows") {
  const TextAttributedGraph g({"alpha", "", "beta"}, {0, 0, 0}, 1, {{0, 1}});
  const auto fm = embed_all(g, FeaturizerConfig{});
  CHECK(fm.empty_rows == std::vector<NodeId>{1});
  CHECK(fm.values.row(1).norm() == 0.0);
  CHECK(fm.config_digest == FeaturizerConfig{}.digest());
}
