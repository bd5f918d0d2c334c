#include "tagraid/serialize.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "tagraid/error.hpp"

namespace tagraid {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!obj.is_object()) throw InputError(fmt::format("{}: expected an object", where));
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw InputError(fmt::format("{}: unknown key \"{}\"", where, key));
  }
}

json flip_json(const EdgeFlip& f) { return {{"u", f.u}, {"v", f.v}, {"op", std::string(to_string(f.op))}}; }

EdgeFlip flip_from(const json& j) {
  reject_unknown(j, {"u", "v", "op"}, "flip");
  const std::string op = j.at("op").get<std::string>();
  if (op != "add" && op != "remove") throw InputError(fmt::format("flip: op must be add or remove (got \"{}\")", op));
  return {j.at("u").get<NodeId>(), j.at("v").get<NodeId>(), op == "add" ? FlipOp::Add : FlipOp::Remove};
}

json edit_json(const TextEdit& e) {
  if (e.kind == TextEdit::Kind::Reorder) return {{"kind", "reorder"}, {"position", e.position}};
  return {{"kind", "homoglyph"},
          {"position", e.position},
          {"original", static_cast<std::uint32_t>(e.original)},
          {"replacement", static_cast<std::uint32_t>(e.replacement)}};
}

TextEdit edit_from(const json& j) {
  reject_unknown(j, {"kind", "position", "original", "replacement"}, "text edit");
  const std::string kind = j.at("kind").get<std::string>();
  const auto pos = j.at("position").get<std::size_t>();
  if (kind == "reorder") return TextEdit::reorder(pos);
  if (kind == "homoglyph") {
    return TextEdit::homoglyph(pos, static_cast<char32_t>(j.at("original").get<std::uint32_t>()),
                               static_cast<char32_t>(j.at("replacement").get<std::uint32_t>()));
  }
  throw InputError(fmt::format("text edit: unknown kind \"{}\"", kind));
}

NodeId node_key(const std::string& key) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(key, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != key.size() || v < 0) throw InputError(fmt::format("expected a node index key, got \"{}\"", key));
  return static_cast<NodeId>(v);
}

template <typename Fn>
auto parse_guarded(std::string_view text, std::string_view what, Fn&& fn) {
  try {
    return fn(json::parse(text));
  } catch (const json::exception& e) {
    throw InputError(fmt::format("{}: {}", what, e.what()));
  }
}

}  // namespace

std::string perturbation_to_json(const PerturbationSet& p) {
  json j;
  j["flips"] = json::array();
  for (const auto& f : p.flips) j["flips"].push_back(flip_json(f));
  j["edge_budget"] = p.edge_budget;
  json edits = json::object();
  for (const auto& [node, list] : p.text_edits) {
    json arr = json::array();
    for (const auto& e : list) arr.push_back(edit_json(e));
    edits[std::to_string(node)] = std::move(arr);
  }
  j["text_edits"] = std::move(edits);
  json budgets = json::object();
  for (const auto& [node, b] : p.char_budget_per_node) budgets[std::to_string(node)] = b;
  j["char_budget"] = std::move(budgets);
  return j.dump(2) + "\n";
}

PerturbationSet perturbation_from_json(std::string_view text) {
  return parse_guarded(text, "perturbation", [](const json& j) {
    reject_unknown(j, {"flips", "edge_budget", "text_edits", "char_budget"}, "perturbation");
    PerturbationSet p;
    if (j.contains("flips")) {
      for (const auto& f : j.at("flips")) p.flips.push_back(flip_from(f));
    }
    p.edge_budget = j.value("edge_budget", std::int64_t{0});
    if (j.contains("text_edits")) {
      for (const auto& [key, arr] : j.at("text_edits").items()) {
        auto& list = p.text_edits[node_key(key)];
        for (const auto& e : arr) list.push_back(edit_from(e));
      }
    }
    if (j.contains("char_budget")) {
      for (const auto& [key, v] : j.at("char_budget").items()) p.char_budget_per_node[node_key(key)] = v.get<std::int64_t>();
    }
    return p;
  });
}

std::string plans_to_json(std::span<const InjectionPlan> plans) {
  json arr = json::array();
  for (const auto& plan : plans) {
    json j;
    j["strategy"] = std::string(to_string(plan.strategy));
    j["target"] = plan.target;
    j["new_edges"] = json::array();
    for (const auto& f : plan.new_edges) j["new_edges"].push_back(flip_json(f));
    json filled = json::object();
    for (const auto& [pos, node] : plan.filled_positions) filled[std::to_string(pos)] = node;
    j["filled_positions"] = std::move(filled);
    j["shortfall"] = plan.shortfall;
    arr.push_back(std::move(j));
  }
  return json{{"plans", std::move(arr)}}.dump(2) + "\n";
}

std::vector<InjectionPlan> plans_from_json(std::string_view text) {
  return parse_guarded(text, "injection plans", [](const json& root) {
    reject_unknown(root, {"plans"}, "injection plans");
    std::vector<InjectionPlan> out;
    for (const auto& j : root.at("plans")) {
      reject_unknown(j, {"strategy", "target", "new_edges", "filled_positions", "shortfall"}, "injection plan");
      InjectionPlan plan;
      plan.strategy = injection_strategy_from(j.at("strategy").get<std::string>());
      plan.target = j.at("target").get<NodeId>();
      for (const auto& f : j.at("new_edges")) plan.new_edges.push_back(flip_from(f));
      for (const auto& [key, node] : j.at("filled_positions").items()) {
        plan.filled_positions[static_cast<std::size_t>(node_key(key))] = node.get<NodeId>();
      }
      plan.shortfall = j.value("shortfall", std::size_t{0});
      out.push_back(std::move(plan));
    }
    return out;
  });
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write {}", path.string()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(fmt::format("write failed for {}", path.string()));
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace tagraid
