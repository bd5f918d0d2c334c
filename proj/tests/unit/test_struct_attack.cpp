#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tagraid/error.hpp"
#include "tagraid/struct_attack.hpp"

using namespace tagraid;

namespace {

TrainConfig surrogate_cfg() {
  TrainConfig t;
  t.epochs = 60;
  t.learning_rate = 20.0;
  t.weight_decay = 1e-4;
  t.seed = 3;
  return t;
}

TextAttributedGraph labelled(std::size_t n, std::size_t m, std::uint64_t seed) {
  const auto g = tagraid::testing::random_graph(n, m, 3, seed);
  std::vector<SplitTag> split(n, SplitTag::Test);
  for (std::size_t i = 0; i < n; i += 2) split[i] = SplitTag::Train;
  return g.with_split(split);
}

}  // namespace

TEST_CASE("nettack candidates") {
  const auto g = tagraid::testing::t5();
  const auto c = nettack_candidates(g, 0);
  // a = 0: (0,1) remove, (0,2..4) add; a = 1: (1,2) (1,3) remove, (1,4) add.
  CHECK(c.size() == 7);
  CHECK(c.front() == EdgeFlip{0, 1, FlipOp::Remove});
  CHECK(std::is_sorted(c.begin(), c.end()));
}

TEST_CASE("first nettack flip equals the exhaustive best single flip") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g = labelled(16, 24, seed);
    const auto x = embed_all(g, FeaturizerConfig{});
    const auto s = train_surrogate(g, x, surrogate_cfg());
    const NodeId target = static_cast<NodeId>(seed % 16);
    const auto expect = tagraid::testing::best_single_flip(g, x, s, target);
    const auto r = nettack_target(g, x, s, target, 1);
    if (expect) {
      REQUIRE(r.flips.size() == 1);
      CHECK(r.flips[0] == *expect);
    } else {
      CHECK(r.flips.empty());
    }
  }
}

TEST_CASE("nettack losses strictly increase and respect the budget") {
  const auto g = labelled(20, 30, 7);
  const auto x = embed_all(g, FeaturizerConfig{});
  const auto s = train_surrogate(g, x, surrogate_cfg());
  const auto r = nettack_target(g, x, s, 3, 4);
  CHECK(r.flips.size() <= 4);
  CHECK(r.losses.size() == r.flips.size() + 1);
  for (std::size_t i = 1; i < r.losses.size(); ++i) CHECK(r.losses[i] > r.losses[i - 1]);
  CHECK_THROWS_AS((void)nettack_target(g, x, s, 3, 0), InputError);
}

TEST_CASE("meta-gradient matches central differences") {
  const auto g = labelled(12, 18, 5);
  const auto x = embed_all(g, FeaturizerConfig{});
  MetattackConfig cfg;
  cfg.unroll_t = 5;
  cfg.inner_lr = 10.0;
  cfg.weight_decay = 1e-4;
  cfg.surrogate = surrogate_cfg();
  const auto problem = make_meta_problem(g, x, cfg);
  const Matrix a = dense_adjacency(g);
  CHECK(tagraid::testing::meta_gradient_fd_error(problem, a, 20, 1e-4, 11) <= 1e-4);
  Matrix grad;
  (void)meta_gradient(problem, a, &grad);
  CHECK((grad - grad.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(grad.diagonal().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("best_meta_flip") {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 1) = a(1, 0) = 1.0;
  Matrix grad = Matrix::Zero(3, 3);
  // Removing (0,1) scores -(-2) = 2, adding (1,2) scores 2: tie to (0,1).
  grad(0, 1) = grad(1, 0) = -2.0;
  grad(1, 2) = grad(2, 1) = 2.0;
  double score = 0.0;
  CHECK(best_meta_flip(grad, a, {}, &score) == EdgeFlip{0, 1, FlipOp::Remove});
  CHECK(score == 2.0);
  const std::vector<Edge> excluded{{0, 1}};
  CHECK(best_meta_flip(grad, a, excluded) == EdgeFlip{1, 2, FlipOp::Add});
}

TEST_CASE("metattack spends exactly its budget") {
  const auto g = labelled(30, 40, 9);
  const auto x = embed_all(g, FeaturizerConfig{});
  MetattackConfig cfg;
  cfg.unroll_t = 5;
  cfg.inner_lr = 10.0;
  cfg.surrogate = surrogate_cfg();
  MetattackTrace trace;
  const auto p = metattack(g, x, cfg, &trace);
  CHECK(static_cast<std::int64_t>(p.flips.size()) == edge_budget(g, 0.1));
  CHECK(check_budget(g, p, 0.1).passed);
  CHECK(metattack(g, x, cfg).flips == p.flips);
  cfg.unroll_t = 0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}
