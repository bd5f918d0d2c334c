#include <doctest.h>

#include <chrono>
#include <numeric>
#include <thread>

#include "fixtures.hpp"
#include "tagraid/confusables.hpp"
#include "tagraid/corrector.hpp"
#include "tagraid/error.hpp"
#include "tagraid/galguard.hpp"
#include "tagraid/sanitize.hpp"
#include "tagraid/text_attack.hpp"

// After Eigen: <resolv.h> (via httplib) defines a _res macro.
#include <httplib.h>
#include <json.hpp>

using namespace tagraid;

namespace {

// Graph with hand-set embeddings so cosines are exact.
struct Fixture {
  TextAttributedGraph graph;
  FeatureMatrix features;
};

Fixture star() {
  // Centre 0 with neighbours 1 (parallel), 2 (orthogonal), 3 (45 degrees).
  Fixture f{TextAttributedGraph(tagraid::testing::word_texts(4), {0, 0, 0, 0}, 1, {{0, 1}, {0, 2}, {0, 3}}), {}};
  f.features.values = Matrix::Zero(4, 2);
  f.features.values.row(0) << 1, 0;
  f.features.values.row(1) << 2, 0;
  f.features.values.row(2) << 0, 1;
  f.features.values.row(3) << 1, 1;
  return f;
}

std::string chat_reply(const std::string& content) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

// Local mock of the chat-completion endpoint, torn down with the object.
class MockServer {
 public:
  explicit MockServer(httplib::Server::Handler handler) {
    server_.Post("/v1/chat/completions", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

RemoteCorrectorConfig remote_at(const std::string& endpoint, double timeout = 5.0) {
  RemoteCorrectorConfig c;
  c.endpoint = endpoint;
  c.model = "mock";
  c.timeout_seconds = timeout;
  return c;
}

}  // namespace

TEST_CASE("purify_edges removes edges below tau") {
  const auto f = star();
  CHECK(purify_edges(f.graph, f.features, 0.1) == std::vector<EdgeFlip>{{0, 2, FlipOp::Remove}});
  CHECK(purify_edges(f.graph, f.features, 0.8).size() == 2);
  CHECK(purify_edges(f.graph, f.features, -1.0).empty());
}

TEST_CASE("guard weights") {
  const auto f = star();
  const auto w = guard_weights(f.features, f.graph, 0.1, 0.5);
  const auto centre = w.of(0);
  REQUIRE(centre.size() == 3);
  const double s = 1.0 + std::sqrt(0.5);
  CHECK(centre[0] == doctest::Approx(1.0 / s));
  CHECK(centre[1] == 0.0);
  CHECK(centre[2] == doctest::Approx(std::sqrt(0.5) / s));
  CHECK(std::accumulate(centre.begin(), centre.end(), 0.0) == doctest::Approx(1.0));
  CHECK(w.self_only == std::vector<NodeId>{2});

  SUBCASE("layer memory blends with the previous weights") {
    GuardWeights prev = w;
    std::fill(prev.weights.begin(), prev.weights.end(), 1.0);
    const auto blended = guard_weights(f.features, f.graph, 0.1, 0.5, &prev);
    CHECK(blended.of(0)[1] == doctest::Approx(0.5));
    CHECK(blended.of(0)[0] == doctest::Approx(0.5 + 0.5 / s));
  }
}

TEST_CASE("purified tree drops dissimilar children") {
  const auto f = star();
  const auto t = purified_tree(f.graph, 0, 1, 3, 1, f.features, 0.1);
  std::vector<NodeId> kids(t.slots.begin() + 1, t.slots.end());
  std::sort(kids.begin(), kids.end());
  CHECK(kids == std::vector<NodeId>{ComputationTree::kPlaceholder, 1, 3});
}

TEST_CASE("sanitize_text") {
  const auto& table = ConfusablesTable::builtin();
  CHECK(sanitize_text("plain ascii text") == "plain ascii text");
  const std::string cyr = "\xD0\xB0" "bc";
  CHECK(sanitize_text(cyr) == "abc");
  for (const std::string s : {std::string("abc"), cyr, std::string("mixed \xD0\xB5 text")}) {
    CHECK(sanitize_text(sanitize_text(s, table), table) == sanitize_text(s, table));
  }
}

TEST_CASE("rule-based correction of a graph") {
  const auto& table = ConfusablesTable::builtin();
  const std::vector<TextEdit> edits{TextEdit::reorder(0)};
  const std::vector<std::string> texts{apply_edits("graph", edits), "clean"};
  const auto report = correct_texts(texts, DefenseConfig{}, table);
  CHECK(report.texts == std::vector<std::string>{"graph", "clean"});
  CHECK(report.fallbacks.empty());
}

TEST_CASE("defend_input without defense keeps every edge") {
  const auto g = tagraid::testing::random_graph(20, 30, 2, 4);
  const auto d = defend_input(g, FeaturizerConfig{}, DefenseKind::None, DefenseConfig{}, ConfusablesTable::builtin());
  CHECK(d.removed.empty());
  CHECK(d.graph.edge_count() == g.edge_count());
}

TEST_CASE("defense config validation") {
  DefenseConfig d;
  d.smoothing_rho = 1.5;
  CHECK_THROWS_AS(d.validate(), InputError);
  CHECK(defense_kind_from("galguard_p") == DefenseKind::GaLGuardP);
  CHECK_THROWS_AS((void)defense_kind_from("pro-gnn"), InputError);
}

TEST_CASE("remote corrector parse contract") {
  CHECK(RemoteCorrector::parse_response(chat_reply("CORRECTED_TEXT: fixed text")) == "fixed text");
  CHECK_FALSE(RemoteCorrector::parse_response(chat_reply("no marker here")).has_value());
  CHECK_FALSE(RemoteCorrector::parse_response("not json").has_value());
  CHECK_FALSE(RemoteCorrector::parse_response("{\"choices\": []}").has_value());
}

TEST_CASE("remote corrector against a mock endpoint") {
  const auto& table = ConfusablesTable::builtin();
  const std::string attacked = "\xD0\xB0" "bc";

  SUBCASE("echoes the corrected text") {
    std::string seen_model;
    MockServer server([&](const httplib::Request& req, httplib::Response& res) {
      const auto body = nlohmann::json::parse(req.body);
      seen_model = body["model"].get<std::string>();
      const auto user = body["messages"][1]["content"].get<std::string>();
      res.set_content(chat_reply("CORRECTED_TEXT: " + user + "!"), "application/json");
    });
    const RemoteCorrector rc(remote_at(server.endpoint()), table);
    const auto r = rc.correct("hello");
    CHECK_FALSE(r.fallback);
    CHECK(r.text == "hello!");
    CHECK(seen_model == "mock");
  }
  SUBCASE("server error falls back to the sanitizer") {
    MockServer server([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    const auto r = RemoteCorrector(remote_at(server.endpoint()), table).correct(attacked);
    CHECK(r.fallback);
    CHECK(r.text == "abc");
  }
  SUBCASE("malformed reply falls back") {
    MockServer server([](const httplib::Request&, httplib::Response& res) {
      res.set_content(chat_reply("sorry"), "application/json");
    });
    CHECK(RemoteCorrector(remote_at(server.endpoint()), table).correct(attacked).fallback);
  }
  SUBCASE("timeout falls back") {
    MockServer server([](const httplib::Request&, httplib::Response& res) {
      std::this_thread::sleep_for(std::chrono::milliseconds(1500));
      res.set_content(chat_reply("CORRECTED_TEXT: late"), "application/json");
    });
    const auto r = RemoteCorrector(remote_at(server.endpoint(), 0.3), table).correct(attacked);
    CHECK(r.fallback);
    CHECK(r.text == "abc");
  }
  SUBCASE("correct_texts reports fallbacks per node") {
    MockServer server([](const httplib::Request& req, httplib::Response& res) {
      const auto user = nlohmann::json::parse(req.body)["messages"][1]["content"].get<std::string>();
      if (user == "bad") {
        res.status = 503;
        return;
      }
      res.set_content(chat_reply("CORRECTED_TEXT: " + user), "application/json");
    });
    DefenseConfig d;
    d.corrector = CorrectorKind::Remote;
    d.remote = remote_at(server.endpoint());
    const std::vector<std::string> texts{"good", "bad", "fine"};
    const auto report = correct_texts(texts, d, table);
    CHECK(report.texts == texts);
    CHECK(report.fallbacks == std::vector<NodeId>{1});
  }
}

TEST_CASE("remote corrector needs an endpoint") {
  CHECK_THROWS_AS(RemoteCorrector(RemoteCorrectorConfig{}, ConfusablesTable::builtin()), InputError);
}
