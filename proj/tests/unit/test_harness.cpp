#include <doctest.h>

#include <filesystem>

#include <json.hpp>

#include "fixtures.hpp"
#include "tagraid/dataset_io.hpp"
#include "tagraid/error.hpp"
#include "tagraid/harness.hpp"
#include "tagraid/serialize.hpp"

using namespace tagraid;

namespace {

std::string tiny_dataset() {
  const auto dir = std::filesystem::temp_directory_path() / "tagraid_test_harness_data";
  std::filesystem::remove_all(dir);
  save_dataset(tagraid::testing::random_graph(60, 110, 3, 8), dir, "tiny");
  return dir.string();
}

std::string tiny_config(const std::string& data) {
  nlohmann::json c = {
      {"version", 1},
      {"name", "tiny"},
      {"dataset", {{"path", data}}},
      {"seeds", {1, 2}},
      {"victims", {"sequence", "gnn"}},
      {"attacks", {"none", "nettack", "metattack", "si", "feature"}},
      {"phases", {"evasion", "poisoning"}},
      {"featurizer", {{"dim", 64}}},
      {"attack",
       {{"cap_injection", true},
        {"metattack", {{"unroll_t", 3}}},
        {"de", {{"generations", 2}, {"population", 6}}}}},
      {"train",
       {{"sequence", {{"epochs", 10}, {"hidden", 16}}},
        {"gnn", {{"epochs", 10}, {"hidden", 16}}},
        {"surrogate", {{"epochs", 20}}}}},
      {"gnn", {{"attention_width", 8}}},
  };
  return c.dump();
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("version is required") { CHECK_THROWS_AS((void)parse_config("{\"dataset\": {\"synthetic\": \"cora-like\"}}"), InputError); }
  SUBCASE("unknown keys are errors at every level") {
    CHECK_THROWS_AS((void)parse_config(R"({"version": 1, "dataset": {"synthetic": "cora-like"}, "bogus": 1})"), InputError);
    CHECK_THROWS_AS((void)parse_config(R"({"version": 1, "dataset": {"synthetic": "cora-like"}, "tree": {"deep": 3}})"),
                    InputError);
  }
  SUBCASE("unsupported version") {
    CHECK_THROWS_AS((void)parse_config(R"({"version": 2, "dataset": {"synthetic": "cora-like"}})"), InputError);
  }
  SUBCASE("overrides") {
    const std::vector<std::string> overrides{"tree.fanout=4", "attacks=[\"metattack\"]", "name=renamed"};
    const auto cfg = parse_config(R"({"version": 1, "dataset": {"synthetic": "cora-like"}})", overrides);
    CHECK(cfg.tree.fanout == 4);
    CHECK(cfg.attacks == std::vector<AttackKind>{AttackKind::Metattack});
    CHECK(cfg.name == "renamed");
    const std::vector<std::string> bad{"tree.nope=1"};
    CHECK_THROWS_AS((void)parse_config(R"({"version": 1, "dataset": {"synthetic": "cora-like"}})", bad), InputError);
  }
  SUBCASE("canonical JSON round trips") {
    const auto cfg = parse_config(R"({"version": 1, "dataset": {"synthetic": "cora-like"}, "seeds": [4]})");
    const auto again = parse_config(config_to_json(cfg));
    CHECK(config_to_json(again) == config_to_json(cfg));
    CHECK(config_digest(again) == config_digest(cfg));
  }
  SUBCASE("shipped configs parse") {
    for (const auto& entry : std::filesystem::directory_iterator(TAGRAID_SOURCE_DIR "/configs")) {
      CAPTURE(entry.path().string());
      CHECK_NOTHROW((void)load_config(entry.path()));
    }
  }
}

TEST_CASE("perturbation JSON round trip") {
  PerturbationSet p;
  p.flips = {{0, 3, FlipOp::Add}, {1, 2, FlipOp::Remove}};
  p.edge_budget = 7;
  p.text_edits[4] = {TextEdit::homoglyph(2, U'a', U'а'), TextEdit::reorder(5)};
  p.char_budget_per_node[4] = 9;
  const auto back = perturbation_from_json(perturbation_to_json(p));
  CHECK(back.flips == p.flips);
  CHECK(back.text_edits == p.text_edits);
  CHECK(back.edge_budget == 7);
  CHECK(back.char_budget_per_node == p.char_budget_per_node);
  CHECK_THROWS_AS((void)perturbation_from_json(R"({"flips": [], "extra": 1})"), InputError);
}

TEST_CASE("tiny experiment") {
  const auto cfg = parse_config(tiny_config(tiny_dataset()));
  const auto report = run_experiment(cfg);
  CHECK_FALSE(report.partial);
  for (const auto& cell : report.cells) {
    CAPTURE(to_string(cell.attack));
    for (const auto& s : cell.seeds) {
      CHECK(s.error.empty());
      CHECK(s.budget.passed);
    }
    if (cell.attack == AttackKind::None) CHECK(cell.percent_drop == 0.0);
  }
  SUBCASE("reruns are bitwise identical") {
    auto strip = [](ExperimentReport r) {
      r.wall_seconds = 0.0;
      for (auto& c : r.cells)
        for (auto& s : c.seeds) s.wall_seconds = 0.0;
      return r;
    };
    CHECK(strip(run_experiment(cfg)) == strip(report));
  }
  SUBCASE("report JSON round trip") {
    CHECK(report_from_json(report_to_json(report)) == report);
    const std::string arr = "[" + report_to_json(report) + "," + report_to_json(report) + "]";
    CHECK(reports_from_json(arr).size() == 2);
  }
  SUBCASE("CSV has one row per dataset, attack, phase and defense") {
    const std::vector<ExperimentReport> one{report};
    const auto csv = report_table_csv(one);
    CHECK(csv.rfind("dataset,attack,phase,defense,sequence,sequence_drop_pct,gnn,gnn_drop_pct\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 5 * 2);
  }
  SUBCASE("external perturbation scoring matches the matrix") {
    const auto p = generate_attack(cfg, 1, AttackKind::Metattack, Phase::Evasion);
    const auto s = evaluate_perturbation(cfg, 1, VictimKind::Gnn, Phase::Evasion, DefenseKind::None, p);
    const auto* cell = report.find(VictimKind::Gnn, AttackKind::Metattack, Phase::Evasion, DefenseKind::None);
    REQUIRE(cell != nullptr);
    CHECK(s.accuracy == cell->seeds[0].accuracy);
  }
}

TEST_CASE("a missing dataset is an input error") {
  auto cfg = parse_config(tiny_config(tiny_dataset()));
  cfg.dataset.path = "/nonexistent/tagraid";
  CHECK_THROWS_AS((void)run_experiment(cfg), InputError);
}
