#include <algorithm>

#include <fmt/format.h>
#include <json.hpp>

#include "tagraid/error.hpp"
#include "tagraid/harness.hpp"
#include "tagraid/serialize.hpp"

namespace tagraid {

using nlohmann::json;

namespace {

json budget_json(const BudgetReport& b) {
  return {{"edge_budget", b.edge_budget},
          {"flip_count", b.flip_count},
          {"edge_excess", b.edge_excess},
          {"char_budget", b.char_budget},
          {"char_violations", b.char_violations},
          {"degree_test_run", b.degree_test_run},
          {"alpha_before", b.alpha_before},
          {"alpha_after", b.alpha_after},
          {"degree_test_passed", b.degree_test_passed},
          {"passed", b.passed}};
}

BudgetReport budget_from(const json& j) {
  BudgetReport b;
  b.edge_budget = j.at("edge_budget").get<std::int64_t>();
  b.flip_count = j.at("flip_count").get<std::int64_t>();
  b.edge_excess = j.at("edge_excess").get<std::int64_t>();
  b.char_budget = j.at("char_budget").get<std::int64_t>();
  b.char_violations = j.at("char_violations").get<std::vector<NodeId>>();
  b.degree_test_run = j.at("degree_test_run").get<bool>();
  b.alpha_before = j.at("alpha_before").get<double>();
  b.alpha_after = j.at("alpha_after").get<double>();
  b.degree_test_passed = j.at("degree_test_passed").get<bool>();
  b.passed = j.at("passed").get<bool>();
  return b;
}

json seed_json(const SeedOutcome& s, bool with_timing) {
  json j = {{"seed", s.seed},
            {"accuracy", s.accuracy ? json(*s.accuracy) : json(nullptr)},
            {"error", s.error},
            {"budget", budget_json(s.budget)},
            {"flips", s.flips},
            {"edited_nodes", s.edited_nodes},
            {"reorder_edits", s.reorder_edits},
            {"homoglyph_edits", s.homoglyph_edits},
            {"injection_shortfall", s.injection_shortfall},
            {"capped_targets", s.capped_targets},
            {"purified_edges", s.purified_edges},
            {"corrector_fallbacks", s.corrector_fallbacks},
            {"unbalanced_texts", s.unbalanced_texts}};
  if (with_timing) j["wall_seconds"] = s.wall_seconds;
  return j;
}

SeedOutcome seed_from(const json& j) {
  SeedOutcome s;
  s.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("accuracy").is_null()) s.accuracy = j.at("accuracy").get<double>();
  s.error = j.at("error").get<std::string>();
  s.budget = budget_from(j.at("budget"));
  s.flips = j.at("flips").get<std::int64_t>();
  s.edited_nodes = j.at("edited_nodes").get<std::int64_t>();
  s.reorder_edits = j.at("reorder_edits").get<std::int64_t>();
  s.homoglyph_edits = j.at("homoglyph_edits").get<std::int64_t>();
  s.injection_shortfall = j.at("injection_shortfall").get<std::int64_t>();
  s.capped_targets = j.at("capped_targets").get<std::int64_t>();
  s.purified_edges = j.at("purified_edges").get<std::int64_t>();
  s.corrector_fallbacks = j.at("corrector_fallbacks").get<std::int64_t>();
  s.unbalanced_texts = j.at("unbalanced_texts").get<std::int64_t>();
  s.wall_seconds = j.value("wall_seconds", 0.0);
  return s;
}

json report_json(const ExperimentReport& r, bool with_timing) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    json seeds = json::array();
    for (const auto& s : c.seeds) seeds.push_back(seed_json(s, with_timing));
    cells.push_back({{"victim", std::string(to_string(c.victim))},
                     {"attack", std::string(to_string(c.attack))},
                     {"phase", std::string(to_string(c.phase))},
                     {"defense", std::string(to_string(c.defense))},
                     {"mean", c.mean},
                     {"std", c.std},
                     {"percent_drop", c.percent_drop ? json(*c.percent_drop) : json(nullptr)},
                     {"partial", c.partial},
                     {"seeds", std::move(seeds)}});
  }
  json j = {{"tool_version", r.tool_version},
            {"name", r.name},
            {"dataset", r.dataset},
            {"config", json::parse(r.config_json)},
            {"config_digest", fmt::format("{:016x}", r.config_digest)},
            {"partial", r.partial},
            {"diagnostics", r.diagnostics},
            {"disclaimer", r.disclaimer},
            {"cells", std::move(cells)}};
  if (with_timing) j["wall_seconds"] = r.wall_seconds;
  return j;
}

ExperimentReport report_from(const json& j) {
  ExperimentReport r;
  r.tool_version = j.at("tool_version").get<std::string>();
  r.name = j.at("name").get<std::string>();
  r.dataset = j.at("dataset").get<std::string>();
  r.config_json = j.at("config").dump(2);
  r.config_digest = std::stoull(j.at("config_digest").get<std::string>(), nullptr, 16);
  r.partial = j.at("partial").get<bool>();
  r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
  r.disclaimer = j.at("disclaimer").get<std::string>();
  r.wall_seconds = j.value("wall_seconds", 0.0);
  for (const auto& c : j.at("cells")) {
    CellReport cell;
    cell.victim = victim_kind_from(c.at("victim").get<std::string>());
    cell.attack = attack_kind_from(c.at("attack").get<std::string>());
    cell.phase = phase_from(c.at("phase").get<std::string>());
    cell.defense = defense_kind_from(c.at("defense").get<std::string>());
    cell.mean = c.at("mean").get<double>();
    cell.std = c.at("std").get<double>();
    if (!c.at("percent_drop").is_null()) cell.percent_drop = c.at("percent_drop").get<double>();
    cell.partial = c.at("partial").get<bool>();
    for (const auto& s : c.at("seeds")) cell.seeds.push_back(seed_from(s));
    r.cells.push_back(std::move(cell));
  }
  return r;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string report_to_json(const ExperimentReport& report, bool with_timing) {
  return report_json(report, with_timing).dump(2) + "\n";
}

ExperimentReport report_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    return report_from(j.is_array() ? j.at(0) : j);
  } catch (const json::exception& e) {
    throw InputError(fmt::format("report: {}", e.what()));
  }
}

std::vector<ExperimentReport> reports_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    std::vector<ExperimentReport> out;
    if (j.is_array()) {
      for (const auto& r : j) out.push_back(report_from(r));
    } else {
      out.push_back(report_from(j));
    }
    return out;
  } catch (const json::exception& e) {
    throw InputError(fmt::format("report: {}", e.what()));
  }
}

std::string report_table_csv(std::span<const ExperimentReport> reports) {
  std::vector<VictimKind> victims;
  for (const auto& r : reports) {
    for (const auto& c : r.cells) {
      if (std::find(victims.begin(), victims.end(), c.victim) == victims.end()) victims.push_back(c.victim);
    }
  }
  std::string out = "dataset,attack,phase,defense";
  for (auto v : victims) out += fmt::format(",{0},{0}_drop_pct", to_string(v));
  out += "\n";
  for (const auto& r : reports) {
    std::vector<std::tuple<AttackKind, Phase, DefenseKind>> rows;
    for (const auto& c : r.cells) {
      const auto row = std::make_tuple(c.attack, c.phase, c.defense);
      if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
    }
    for (const auto& [attack, phase, defense] : rows) {
      out += fmt::format("{},{},{},{}", csv_field(r.dataset), to_string(attack), to_string(phase), to_string(defense));
      for (auto v : victims) {
        const CellReport* c = r.find(v, attack, phase, defense);
        const bool has = c && std::any_of(c->seeds.begin(), c->seeds.end(), [](const auto& s) { return s.accuracy.has_value(); });
        if (!has) {
          out += ",,";
          continue;
        }
        out += fmt::format(",{:.2f}±{:.2f},", c->mean, c->std);
        if (c->percent_drop) out += fmt::format("{:.1f}", *c->percent_drop);
      }
      out += "\n";
    }
  }
  return out;
}

void emit_report(std::span<const ExperimentReport> reports, const std::filesystem::path& dir) {
  if (reports.empty()) throw InputError("emit_report: no reports");
  try {
    std::filesystem::create_directories(dir);
  } catch (const std::filesystem::filesystem_error& e) {
    throw Error(fmt::format("cannot create {}: {}", dir.string(), e.what()));
  }
  std::string body;
  if (reports.size() == 1) {
    body = report_to_json(reports.front());
  } else {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(report_json(r, true));
    body = arr.dump(2) + "\n";
  }
  write_text_file(dir / "report.json", body);
  write_text_file(dir / "table.csv", report_table_csv(reports));
}

}  // namespace tagraid
