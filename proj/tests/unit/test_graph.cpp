#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "tagraid/dataset_io.hpp"
#include "tagraid/error.hpp"
#include "tagraid/graph.hpp"
#include "tagraid/perturbation.hpp"
#include "tagraid/synth.hpp"

using namespace tagraid;
using tagraid::testing::t5;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tagraid_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write(const std::filesystem::path& p, const std::string& body) {
  std::ofstream(p) << body;
}

}  // namespace

TEST_CASE("load_dataset collapses reversed duplicate edges") {
  const auto dir = scratch_dir("dedup");
  write(dir / "nodes.jsonl", "{\"id\": \"0\", \"text\": \"a\", \"label\": \"x\"}\n{\"id\": \"1\", \"text\": \"b\", \"label\": \"y\"}\n");
  write(dir / "edges.csv", "src,dst\n0,1\n1,0\n");
  const auto g = load_dataset(dir);
  CHECK(g.node_count() == 2);
  CHECK(g.edge_count() == 1);
  CHECK(g.num_classes() == 2);
}

TEST_CASE("load_dataset reports the file and line of a bad row") {
  const auto dir = scratch_dir("badrow");
  write(dir / "nodes.jsonl", "{\"id\": \"0\", \"text\": \"a\", \"label\": \"x\"}\nnot json\n");
  write(dir / "edges.csv", "src,dst\n");
  try {
    (void)load_dataset(dir);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    const std::string what = e.what();
    CHECK(what.find("nodes.jsonl") != std::string::npos);
    CHECK(what.find('2') != std::string::npos);
  }
}

TEST_CASE("load_dataset rejects edges to unknown ids") {
  const auto dir = scratch_dir("unknown");
  write(dir / "nodes.jsonl", "{\"id\": \"0\", \"text\": \"a\", \"label\": \"x\"}\n");
  write(dir / "edges.csv", "src,dst\n0,9\n");
  CHECK_THROWS_AS((void)load_dataset(dir), InputError);
}

TEST_CASE("save_dataset then load_dataset reproduces the graph") {
  const auto g = split_nodes(generate_synthetic(cora_like(), 3), {}, 5);
  const auto dir = scratch_dir("roundtrip");
  save_dataset(g, dir, "cora-like");
  const auto back = load_dataset(dir);
  CHECK(back.same_content(g));
  CHECK(back.class_names() == g.class_names());
}

TEST_CASE("synthetic cora-like profile matches the published counts") {
  const auto g = generate_synthetic(cora_like(), 0);
  CHECK(g.node_count() == 2708);
  CHECK(g.edge_count() == 5429);
  CHECK(g.num_classes() == 7);
  for (std::size_t u = 0; u < g.node_count(); ++u) REQUIRE(g.degree(static_cast<NodeId>(u)) >= 1);
  CHECK(generate_synthetic(cora_like(), 0).same_content(g));
}

TEST_CASE("split_nodes ratios") {
  SUBCASE("ten nodes split 6/2/2") {
    const auto g = tagraid::testing::random_graph(10, 12, 1, 1);
    const auto s = split_nodes(g, {0.6, 0.2, 0.2}, 7);
    CHECK(s.nodes_with(SplitTag::Train).size() == 6);
    CHECK(s.nodes_with(SplitTag::Val).size() == 2);
    CHECK(s.nodes_with(SplitTag::Test).size() == 2);
  }
  SUBCASE("cora-sized graph splits 1625/541/542") {
    const auto s = split_nodes(generate_synthetic(cora_like(), 0), {0.6, 0.2, 0.2}, 1);
    CHECK(s.nodes_with(SplitTag::Train).size() == 1625);
    CHECK(s.nodes_with(SplitTag::Val).size() == 541);
    CHECK(s.nodes_with(SplitTag::Test).size() == 542);
  }
  SUBCASE("deterministic per seed") {
    const auto g = tagraid::testing::random_graph(60, 90, 3, 2);
    CHECK(split_nodes(g, {}, 11).splits() == split_nodes(g, {}, 11).splits());
    CHECK(split_nodes(g, {}, 11).splits() != split_nodes(g, {}, 12).splits());
  }
  SUBCASE("bad ratios") { CHECK_THROWS_AS((void)split_nodes(t5(), {0.5, 0.2, 0.2}, 1), InputError); }
}

TEST_CASE("apply_flips") {
  const auto path = tagraid::testing::path3();
  SUBCASE("add closes the triangle") {
    const std::vector<EdgeFlip> flips{{0, 2, FlipOp::Add}};
    const auto g = apply_flips(path, flips);
    CHECK(g.edge_count() == 3);
    CHECK(g.has_edge(0, 2));
  }
  SUBCASE("empty flip list is the identity") { CHECK(apply_flips(path, {}).same_content(path)); }
  SUBCASE("removing an absent edge names index 0") {
    const std::vector<EdgeFlip> flips{{0, 2, FlipOp::Remove}};
    try {
      (void)apply_flips(path, flips);
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find('0') != std::string::npos);
    }
  }
  SUBCASE("self loop") {
    const std::vector<EdgeFlip> flips{{1, 1, FlipOp::Add}};
    CHECK_THROWS_AS((void)apply_flips(path, flips), InputError);
  }
}

TEST_CASE("two_hop") {
  const auto g = t5();
  CHECK(two_hop(g, 0) == std::vector<NodeId>{0, 1, 2, 3});
  const TextAttributedGraph iso(tagraid::testing::word_texts(3), {0, 0, 0}, 1, {{0, 1}});
  CHECK(two_hop(iso, 2) == std::vector<NodeId>{2});
  const auto k4 = tagraid::testing::complete(4);
  for (NodeId u = 0; u < 4; ++u) CHECK(two_hop(k4, u).size() == 4);
}

TEST_CASE("two_hop matches a breadth-first oracle on random graphs") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = tagraid::testing::random_graph(30, 45, 2, seed);
    for (NodeId u = 0; u < 30; ++u) {
      std::vector<int> dist(30, -1);
      dist[static_cast<std::size_t>(u)] = 0;
      std::vector<NodeId> frontier{u};
      for (int level = 1; level <= 2; ++level) {
        std::vector<NodeId> next;
        for (NodeId a : frontier)
          for (NodeId b : g.neighbors(a))
            if (dist[static_cast<std::size_t>(b)] < 0) {
              dist[static_cast<std::size_t>(b)] = level;
              next.push_back(b);
            }
        frontier = next;
      }
      std::vector<NodeId> expect;
      for (NodeId v = 0; v < 30; ++v)
        if (dist[static_cast<std::size_t>(v)] >= 0) expect.push_back(v);
      CHECK(two_hop(g, u) == expect);
    }
  }
}

TEST_CASE("check_budget") {
  const auto g = generate_synthetic(cora_like(), 0);
  CHECK(edge_budget(g, 0.1) == 542);
  CHECK(check_budget(g, PerturbationSet{}, 0.1).passed);

  PerturbationSet p;
  for (NodeId v = 1; p.flips.size() < 543; ++v) {
    if (!g.has_edge(0, v)) p.flips.push_back({0, v, FlipOp::Add});
  }
  const auto r = check_budget(g, p, 0.1);
  CHECK_FALSE(r.passed);
  CHECK(r.edge_excess == 1);

  PerturbationSet t;
  const auto cb = char_budget(g, 0.1);
  for (std::int64_t i = 0; i <= cb; ++i) t.text_edits[3].push_back(TextEdit::reorder(static_cast<std::size_t>(2 * i)));
  const auto rt = check_budget(g, t, 0.1);
  CHECK_FALSE(rt.passed);
  CHECK(rt.char_violations == std::vector<NodeId>{3});
}

TEST_CASE("induced_subgraph keeps internal edges only") {
  const auto g = t5();
  const std::vector<NodeId> nodes{1, 2, 3};
  const auto s = induced_subgraph(g, nodes);
  CHECK(s.node_count() == 3);
  CHECK(s.edge_count() == 3);
  CHECK(s.text(0) == g.text(1));
}

TEST_CASE("power_law_alpha is finite on a heavy-tailed graph") {
  const auto g = generate_synthetic(cora_like(), 2);
  const double a = power_law_alpha(g);
  CHECK(a > 1.0);
  CHECK(a < 6.0);
}
