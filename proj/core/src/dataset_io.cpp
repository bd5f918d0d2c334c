#include "tagraid/dataset_io.hpp"

#include <fmt/format.h>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "tagraid/error.hpp"

namespace tagraid {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
  return in;
}

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] == '"' && i + 2 < s.size() && s[i + 1] == '"') ++i;
      out.push_back(s[i]);
    }
    return out;
  }
  return s;
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '"') {
      quoted = !quoted;
      cur.push_back(c);
    } else if (c == ',' && !quoted) {
      fields.push_back(unquote(trim(cur)));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(unquote(trim(cur)));
  return fields;
}

}  // namespace

TextAttributedGraph load_dataset(const fs::path& dir) {
  const fs::path nodes_path = dir / "nodes.jsonl";
  const fs::path edges_path = dir / "edges.csv";
  const fs::path splits_path = dir / "splits.json";
  const fs::path meta_path = dir / "meta.json";

  std::vector<std::string> declared_classes;
  bool has_declared = false;
  if (fs::exists(meta_path)) {
    auto in = open_input(meta_path);
    json meta;
    try {
      meta = json::parse(in);
    } catch (const json::exception& e) {
      throw InputError(fmt::format("{}: {}", meta_path.string(), e.what()));
    }
    if (meta.contains("classes")) {
      declared_classes = meta.at("classes").get<std::vector<std::string>>();
      has_declared = true;
    }
  }

  std::unordered_map<std::string, NodeId> id_index;
  std::unordered_map<std::string, int> class_index;
  std::vector<std::string> class_names = declared_classes;
  for (std::size_t c = 0; c < declared_classes.size(); ++c) class_index.emplace(declared_classes[c], static_cast<int>(c));

  std::vector<std::string> ids, texts;
  std::vector<int> labels;
  {
    auto in = open_input(nodes_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      json row;
      try {
        row = json::parse(line);
      } catch (const json::exception&) {
        throw InputError(fmt::format("{}:{}: malformed JSON row", nodes_path.string(), line_no));
      }
      if (!row.is_object() || !row.contains("id") || !row.contains("text") || !row.contains("label")) {
        throw InputError(fmt::format("{}:{}: row needs \"id\", \"text\" and \"label\"", nodes_path.string(), line_no));
      }
      auto as_string = [&](const json& v, const char* field) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_number_integer()) return std::to_string(v.get<long long>());
        throw InputError(fmt::format("{}:{}: field \"{}\" must be a string", nodes_path.string(), line_no, field));
      };
      std::string id = as_string(row["id"], "id");
      std::string label = as_string(row["label"], "label");
      if (!row["text"].is_string()) {
        throw InputError(fmt::format("{}:{}: field \"text\" must be a string", nodes_path.string(), line_no));
      }
      if (!id_index.emplace(id, static_cast<NodeId>(ids.size())).second) {
        throw InputError(fmt::format("{}:{}: duplicate node id \"{}\"", nodes_path.string(), line_no, id));
      }
      auto it = class_index.find(label);
      if (it == class_index.end()) {
        if (has_declared) {
          throw InputError(fmt::format("{}:{}: label \"{}\" is not among the {} declared classes",
                                       nodes_path.string(), line_no, label, declared_classes.size()));
        }
        it = class_index.emplace(label, static_cast<int>(class_names.size())).first;
        class_names.push_back(label);
      }
      ids.push_back(std::move(id));
      texts.push_back(row["text"].get<std::string>());
      labels.push_back(it->second);
    }
  }

  std::vector<Edge> edges;
  {
    auto in = open_input(edges_path);
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      auto fields = split_csv_row(line);
      if (!header_seen) {
        header_seen = true;
        if (fields.size() != 2 || fields[0] != "src" || fields[1] != "dst") {
          throw InputError(fmt::format("{}:{}: expected header \"src,dst\"", edges_path.string(), line_no));
        }
        continue;
      }
      if (fields.size() != 2) {
        throw InputError(fmt::format("{}:{}: expected 2 fields, got {}", edges_path.string(), line_no, fields.size()));
      }
      auto a = id_index.find(fields[0]);
      auto b = id_index.find(fields[1]);
      if (a == id_index.end() || b == id_index.end()) {
        throw InputError(fmt::format("{}:{}: unknown node id \"{}\"", edges_path.string(), line_no,
                                     a == id_index.end() ? fields[0] : fields[1]));
      }
      if (a->second == b->second) {
        throw InputError(fmt::format("{}:{}: self loop on \"{}\"", edges_path.string(), line_no, fields[0]));
      }
      edges.push_back(make_edge(a->second, b->second));
    }
    if (!header_seen) throw InputError(fmt::format("{}: empty file", edges_path.string()));
  }

  std::vector<SplitTag> split(ids.size(), SplitTag::None);
  if (fs::exists(splits_path)) {
    auto in = open_input(splits_path);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw InputError(fmt::format("{}: {}", splits_path.string(), e.what()));
    }
    const std::pair<const char*, SplitTag> keys[] = {
        {"train", SplitTag::Train}, {"val", SplitTag::Val}, {"test", SplitTag::Test}};
    for (const auto& [key, tag] : keys) {
      if (!doc.contains(key)) continue;
      for (const auto& v : doc.at(key)) {
        const std::string id = v.is_string() ? v.get<std::string>() : v.dump();
        auto it = id_index.find(id);
        if (it == id_index.end()) {
          throw InputError(fmt::format("{}: split \"{}\" references unknown node \"{}\"", splits_path.string(), key, id));
        }
        split[static_cast<std::size_t>(it->second)] = tag;
      }
    }
  }

  const int num_classes = static_cast<int>(class_names.size());
  return TextAttributedGraph(std::move(texts), std::move(labels), num_classes, std::move(edges), std::move(split),
                             std::move(ids), std::move(class_names));
}

void save_dataset(const TextAttributedGraph& graph, const fs::path& dir, std::string_view name) {
  fs::create_directories(dir);
  const auto& ids = graph.external_ids();
  {
    std::ofstream out(dir / "nodes.jsonl", std::ios::binary);
    if (!out) throw InputError(fmt::format("cannot write {}", (dir / "nodes.jsonl").string()));
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
      const auto u = static_cast<NodeId>(i);
      json row = {{"id", ids[i]},
                  {"text", graph.text(u)},
                  {"label", graph.class_names()[static_cast<std::size_t>(graph.label(u))]}};
      out << row.dump() << '\n';
    }
  }
  {
    std::ofstream out(dir / "edges.csv", std::ios::binary);
    if (!out) throw InputError(fmt::format("cannot write {}", (dir / "edges.csv").string()));
    out << "src,dst\n";
    for (const auto& e : graph.edges()) {
      out << ids[static_cast<std::size_t>(e.u)] << ',' << ids[static_cast<std::size_t>(e.v)] << '\n';
    }
  }
  {
    json meta = {{"classes", graph.class_names()}};
    if (!name.empty()) meta["name"] = std::string(name);
    std::ofstream out(dir / "meta.json", std::ios::binary);
    out << meta.dump(2) << '\n';
  }
  const bool tagged = std::none_of(graph.splits().begin(), graph.splits().end(),
                                   [](SplitTag t) { return t == SplitTag::None; });
  if (tagged && graph.node_count() > 0) {
    json doc = {{"train", json::array()}, {"val", json::array()}, {"test", json::array()}};
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
      doc[std::string(to_string(graph.split(static_cast<NodeId>(i))))].push_back(ids[i]);
    }
    std::ofstream out(dir / "splits.json", std::ios::binary);
    out << doc.dump() << '\n';
  } else if (fs::exists(dir / "splits.json")) {
    fs::remove(dir / "splits.json");
  }
}

}  // namespace tagraid
