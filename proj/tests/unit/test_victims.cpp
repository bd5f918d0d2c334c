#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fd_check.hpp"
#include "fixtures.hpp"
#include "tagraid/error.hpp"
#include "tagraid/victims.hpp"

using namespace tagraid;
using tagraid::testing::fd_check;

namespace {

FeaturizerConfig small_featurizer() {
  FeaturizerConfig f;
  f.dim = 16;
  return f;
}

TrainConfig quick(int epochs, double lr) {
  TrainConfig t;
  t.epochs = epochs;
  t.learning_rate = lr;
  t.hidden = 8;
  t.weight_decay = 1e-3;
  t.seed = 4;
  return t;
}

// Ten nodes, two classes, every node in train so every parameter is live.
TextAttributedGraph ten_node_graph() {
  auto g = tagraid::testing::random_graph(10, 14, 2, 21);
  return g.with_split(std::vector<SplitTag>(10, SplitTag::Train));
}

// Two 6-cliques with distinct labels and texts; alternate nodes train/test.
TextAttributedGraph two_cliques() {
  std::vector<std::string> texts;
  std::vector<int> labels;
  std::vector<Edge> edges;
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < 6; ++i) {
      texts.push_back(c == 0 ? "alpha beta gamma delta " + std::to_string(i) : "omega psi chi phi " + std::to_string(i));
      labels.push_back(c);
      for (int j = 0; j < i; ++j) edges.push_back({c * 6 + j, c * 6 + i});
    }
  }
  std::vector<SplitTag> split;
  for (int i = 0; i < 12; ++i) split.push_back(i % 2 == 0 ? SplitTag::Train : SplitTag::Test);
  return TextAttributedGraph(texts, labels, 2, edges, split);
}

double fd_error(const VictimParams& params, const TextAttributedGraph& g, const FeatureMatrix& x) {
  auto f = [&](std::span<const double> v, std::vector<double>* grad) {
    return training_objective(unflatten(params, v), g, x, 1e-3, grad);
  };
  const auto flat = flatten(params);
  const auto idx = tagraid::testing::all_indices(flat.size());
  return fd_check(f, flat, idx).max_rel_error;
}

}  // namespace

TEST_CASE("trainable-layer gradients match central differences") {
  const auto g = ten_node_graph();
  const auto x = embed_all(g, small_featurizer());

  SUBCASE("surrogate") {
    const VictimParams p = train_surrogate(g, x, quick(3, 0.5));
    CHECK(fd_error(p, g, x) <= 1e-4);
  }
  SUBCASE("sequence victim") {
    SequenceTrainOptions o;
    o.template_seed = 9;
    const VictimParams p = train_sequence_victim(g, x, o, quick(3, 0.05));
    CHECK(fd_error(p, g, x) <= 1e-4);
  }
  SUBCASE("sequence victim with M_global and purified trees") {
    SequenceTrainOptions o;
    o.template_seed = 9;
    o.m_global_dim = 5;
    o.tree_filter = 0.05;
    auto p = train_sequence_victim(g, x, o, quick(3, 0.05));
    for (Eigen::Index i = 0; i < p.m_global->size(); ++i) (*p.m_global)[i] = 0.1 * static_cast<double>(i + 1);
    CHECK(fd_error(VictimParams(p), g, x) <= 1e-4);
  }
  SUBCASE("gnn victim") {
    GnnTrainOptions o;
    o.attention_width = 6;
    const VictimParams p = train_gnn_victim(g, x, o, quick(3, 0.05));
    CHECK(fd_error(p, g, x) <= 1e-4);
  }
  SUBCASE("gnn victim without residual") {
    GnnTrainOptions o;
    o.attention_width = 6;
    o.residual = false;
    const VictimParams p = train_gnn_victim(g, x, o, quick(3, 0.05));
    CHECK(fd_error(p, g, x) <= 1e-4);
  }
  SUBCASE("guarded gnn victim") {
    GnnTrainOptions o;
    o.attention_width = 6;
    o.guard = GuardSettings{0.1, 0.5};
    const VictimParams p = train_gnn_victim(g, x, o, quick(3, 0.05));
    CHECK(fd_error(p, g, x) <= 1e-4);
  }
}

TEST_CASE("separable cliques are classified perfectly") {
  const auto g = two_cliques();
  const auto x = embed_all(g, small_featurizer());
  CHECK(evaluate(train_surrogate(g, x, quick(200, 5.0)), g, x, SplitTag::Test) == 1.0);
  SequenceTrainOptions so;
  CHECK(evaluate(train_sequence_victim(g, x, so, quick(100, 0.01)), g, x, SplitTag::Test) == 1.0);
  CHECK(evaluate(train_gnn_victim(g, x, GnnTrainOptions{8, true, {}}, quick(100, 0.01)), g, x, SplitTag::Test) == 1.0);
}

TEST_CASE("zero epochs is rejected") {
  const auto g = two_cliques();
  const auto x = embed_all(g, small_featurizer());
  CHECK_THROWS_AS((void)train_surrogate(g, x, quick(0, 1.0)), InputError);
  CHECK_THROWS_AS((void)train_sequence_victim(g, x, {}, quick(0, 1.0)), InputError);
}

TEST_CASE("surrogate loss trace never increases") {
  const auto g = ten_node_graph();
  const auto x = embed_all(g, small_featurizer());
  LossTrace trace;
  (void)train_surrogate(g, x, quick(100, 50.0), &trace);
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
}

TEST_CASE("sequence victim reads the determining neighbour") {
  // Pairs (2i, 2i+1); the pair label is written only in the partner's text.
  std::vector<std::string> texts;
  std::vector<int> labels;
  std::vector<Edge> edges;
  std::vector<SplitTag> split;
  for (int i = 0; i < 20; ++i) {
    const int label = i % 2;
    texts.push_back("neutral filler words " + std::to_string(i));
    texts.push_back(label == 0 ? "red red red" : "blue blue blue");
    labels.push_back(label);
    labels.push_back(label);
    edges.push_back({2 * i, 2 * i + 1});
    split.push_back(i < 14 ? SplitTag::Train : SplitTag::Test);
    split.push_back(SplitTag::Val);
  }
  const TextAttributedGraph g(texts, labels, 2, edges, split);
  const auto x = embed_all(g, small_featurizer());
  SequenceTrainOptions o;
  o.tree = {1, 1, true};
  CHECK(evaluate(train_sequence_victim(g, x, o, quick(200, 0.01)), g, x, SplitTag::Test) == 1.0);
}

TEST_CASE("isolated node sequence is its embedding plus placeholders") {
  const TextAttributedGraph g(tagraid::testing::word_texts(3), {0, 1, 0}, 2, {{0, 1}},
                              {SplitTag::Train, SplitTag::Train, SplitTag::Test});
  const auto x = embed_all(g, small_featurizer());
  SequenceTrainOptions o;
  const auto p = train_sequence_victim(g, x, o, quick(2, 0.01));
  const Vector seq = sequence_input(p, g, x, 2);
  const Matrix pe = positional_rows(2, 3, 16);
  REQUIRE(seq.size() == 13 * 16);
  CHECK((seq.head(16) - (x.values.row(2).transpose() + p.pe_weight * pe.row(0).transpose())).norm() < 1e-12);
  for (int pos = 1; pos < 13; ++pos) {
    CHECK((seq.segment(pos * 16, 16) - (p.placeholder + p.pe_weight * pe.row(pos).transpose())).norm() < 1e-12);
  }
}

TEST_CASE("training is bitwise deterministic") {
  const auto g = ten_node_graph();
  const auto x = embed_all(g, small_featurizer());
  CHECK(train_sequence_victim(g, x, {}, quick(5, 0.01)) == train_sequence_victim(g, x, {}, quick(5, 0.01)));
  CHECK(train_gnn_victim(g, x, {}, quick(5, 0.01)) == train_gnn_victim(g, x, {}, quick(5, 0.01)));
}

TEST_CASE("gnn attention") {
  const auto g = ten_node_graph();
  const auto x = embed_all(g, small_featurizer());
  const auto p = train_gnn_victim(g, x, GnnTrainOptions{6, true, {}}, quick(3, 0.05));
  for (NodeId u = 0; u < 10; ++u) {
    double sum = 0.0;
    for (double a : gnn_attention(p, g, x, u)) sum += a;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("isolated node prediction depends only on its own text") {
  auto texts = tagraid::testing::word_texts(6);
  const TextAttributedGraph g(texts, {0, 1, 0, 1, 0, 1}, 2, {{0, 1}, {1, 2}, {2, 3}, {3, 4}},
                              std::vector<SplitTag>(6, SplitTag::Train));
  const auto x = embed_all(g, small_featurizer());
  const auto p = train_gnn_victim(g, x, GnnTrainOptions{6, true, {}}, quick(3, 0.05));
  texts[0] = "something else entirely";
  texts[3] = "and another rewrite";
  const auto g2 = g.with_texts(texts);
  const auto x2 = embed_all(g2, small_featurizer());
  const std::vector<NodeId> node{5};
  CHECK(victim_logits(p, g, x, node) == victim_logits(p, g2, x2, node));
}

TEST_CASE("evaluate") {
  const auto g = two_cliques();
  const auto x = embed_all(g, small_featurizer());
  const auto p = train_gnn_victim(g, x, GnnTrainOptions{8, true, {}}, quick(100, 0.01));
  CHECK(evaluate(p, g, x, SplitTag::Test) == 1.0);
  // Swap the labels: the same predictions are now all wrong.
  std::vector<int> flipped;
  for (int l : g.labels()) flipped.push_back(1 - l);
  const TextAttributedGraph swapped(g.texts(), flipped, 2, g.edges(), g.splits());
  CHECK(evaluate(p, swapped, x, SplitTag::Test) == 0.0);
}

TEST_CASE("victim files") {
  const auto g = ten_node_graph();
  const auto x = embed_all(g, small_featurizer());
  const auto dir = std::filesystem::temp_directory_path() / "tagraid_test_victims";
  std::filesystem::create_directories(dir);
  const VictimParams seq = train_sequence_victim(g, x, {}, quick(2, 0.01));
  const VictimParams gnn = train_gnn_victim(g, x, {}, quick(2, 0.01));
  const VictimParams sur = train_surrogate(g, x, quick(2, 1.0));
  for (const auto& [name, v] : {std::pair{"seq", seq}, std::pair{"gnn", gnn}, std::pair{"sur", sur}}) {
    const auto path = dir / (std::string(name) + ".tgrv");
    save_victim(v, path);
    CHECK(load_victim(path, x.config_digest) == v);
    CHECK_THROWS_AS((void)load_victim(path, x.config_digest ^ 1), InputError);
  }
  const auto bad = dir / "bad.tgrv";
  std::ofstream(bad) << "XXXX garbage";
  CHECK_THROWS_AS((void)load_victim(bad), InputError);
}

TEST_CASE("features from another featurizer are refused") {
  const auto g = ten_node_graph();
  const auto x = embed_all(g, small_featurizer());
  const auto p = train_gnn_victim(g, x, {}, quick(2, 0.01));
  FeaturizerConfig other = small_featurizer();
  other.ngram = 2;
  CHECK_THROWS_AS((void)evaluate(p, g, embed_all(g, other), SplitTag::Train), InputError);
}

TEST_CASE("positional rows are zero past the tree size") {
  const Matrix pe = positional_rows(2, 3, 16);
  CHECK(pe.rows() == 13);
  CHECK(pe.cols() == 16);
  CHECK(pe.rightCols(3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(pe.leftCols(13) == laplacian_pe(2, 3, 13));
}
