#include <doctest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tagraid/error.hpp"
#include "tagraid/template_attack.hpp"

using namespace tagraid;
using tagraid::testing::t5;

namespace {

constexpr NodeId PH = ComputationTree::kPlaceholder;

}  // namespace

TEST_CASE("tree on T5 rooted at 0") {
  const auto tree = build_tree(t5(), 0, 1, 3, 5);
  CHECK(tree.slots == std::vector<NodeId>{0, 1, PH, PH});
  CHECK(tree.placeholder_positions() == std::vector<std::size_t>{2, 3});
  CHECK(attachable_placeholders(tree) == std::vector<std::size_t>{2, 3});
}

TEST_CASE("a placeholder's children are placeholders") {
  const auto tree = build_tree(t5(), 0, 2, 3, 5);
  REQUIRE(tree.positions() == 13);
  for (std::size_t p = 1; p < 4; ++p) {
    if (!tree.is_placeholder(p)) continue;
    for (std::size_t c = tree.first_child(p); c < tree.first_child(p) + 3; ++c) CHECK(tree.is_placeholder(c));
  }
}

TEST_CASE("SI on T5 injects node 4 under the root") {
  const auto g = t5();
  const auto plan = inject(g, 0, build_tree(g, 0, 1, 3, 5), InjectionStrategy::SI, 1);
  REQUIRE(plan.new_edges.size() == 1);
  CHECK(plan.new_edges[0] == EdgeFlip{0, 4, FlipOp::Add});
  CHECK(plan.filled_positions == std::map<std::size_t, NodeId>{{2, 4}});
}

TEST_CASE("tree rooted elsewhere is rejected") {
  const auto g = t5();
  CHECK_THROWS_AS((void)inject(g, 1, build_tree(g, 0, 1, 3, 5), InjectionStrategy::NI, 1), InputError);
}

TEST_CASE("original-first sampling keeps reference neighbours in front") {
  // Node 0 has reference neighbours 1, 2 and an added neighbour 3; k = 2.
  const TextAttributedGraph ref(tagraid::testing::word_texts(4), {0, 0, 0, 0}, 1, {{0, 1}, {0, 2}});
  const auto attacked = ref.with_edges({{0, 1}, {0, 2}, {0, 3}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto tree = build_tree(attacked, 0, TreeOptions{1, 2, true}, seed, &ref);
    std::vector<NodeId> kids{tree.slots[1], tree.slots[2]};
    std::sort(kids.begin(), kids.end());
    CHECK(kids == std::vector<NodeId>{1, 2});
  }
}

TEST_CASE("injection plans on random graphs") {
  for (std::uint64_t instance = 0; instance < 60; ++instance) {
    const auto g = tagraid::testing::random_graph(40, 50, 3, instance + 100);
    const auto u = static_cast<NodeId>(instance % 40);
    const auto tree = build_tree(g, u, 2, 3, instance);
    CHECK(tree.placeholder_positions().size() == tagraid::testing::recount_placeholders(g, tree));
    const auto near = two_hop(g, u);
    for (auto s : {InjectionStrategy::NI, InjectionStrategy::SI, InjectionStrategy::MSI}) {
      const auto plan = inject(g, u, tree, s, instance);
      for (const auto& [pos, v] : plan.filled_positions) {
        CHECK_FALSE(std::binary_search(near.begin(), near.end(), v));
        CHECK(tree.is_placeholder(pos));
      }
      if (s == InjectionStrategy::MSI) {
        std::vector<NodeId> nodes;
        for (const auto& [pos, v] : plan.filled_positions) nodes.push_back(v);
        for (std::size_t i = 1; i < nodes.size(); ++i) {
          CHECK(nodes[i] != nodes[i - 1]);
          CHECK(g.degree(nodes[i]) <= g.degree(nodes[i - 1]));
        }
      }
      if (s == InjectionStrategy::SI && !plan.filled_positions.empty()) {
        const NodeId v = plan.filled_positions.begin()->second;
        for (NodeId w = 0; w < 40; ++w) {
          if (!std::binary_search(near.begin(), near.end(), w)) CHECK(g.degree(w) <= g.degree(v));
        }
      }
    }
  }
}

TEST_CASE("merge_plans drops duplicates and existing edges") {
  const auto g = t5();
  InjectionPlan a, b;
  a.target = 2;
  a.new_edges = {{0, 4, FlipOp::Add}, {1, 2, FlipOp::Add}};
  b.target = 0;
  b.new_edges = {{0, 4, FlipOp::Add}, {0, 2, FlipOp::Add}};
  const std::vector<InjectionPlan> plans{a, b};
  CHECK(merge_plans(g, plans) == std::vector<EdgeFlip>{{0, 4, FlipOp::Add}, {0, 2, FlipOp::Add}});
}

TEST_CASE("degree ranking breaks ties by id") {
  const auto g = t5();
  const std::vector<NodeId> pool{4, 0, 2, 3, 1};
  CHECK(degree_ranked(g, pool) == std::vector<NodeId>{1, 3, 2, 0, 4});
}

TEST_CASE("node_sequence checks PE shape") {
  const auto g = t5();
  const auto x = embed_all(g, FeaturizerConfig{});
  const auto tree = build_tree(g, 0, 1, 3, 5);
  const Vector ph = Vector::Zero(512);
  CHECK_THROWS_AS((void)node_sequence(tree, x, ph, Matrix::Zero(3, 512), 1.0), InputError);
  const Vector seq = node_sequence(tree, x, ph, Matrix::Zero(4, 512), 1.0);
  CHECK(seq.size() == 4 * 512);
  CHECK(seq.head(512) == x.values.row(0).transpose());
}
