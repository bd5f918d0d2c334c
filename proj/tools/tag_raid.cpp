// tag-raid: attack, defend and evaluate victims on text-attributed graphs.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "tagraid/confusables.hpp"
#include "tagraid/dataset_io.hpp"
#include "tagraid/error.hpp"
#include "tagraid/harness.hpp"
#include "tagraid/pipeline.hpp"
#include "tagraid/serialize.hpp"
#include "tagraid/synth.hpp"
#include "tagraid/version.hpp"

namespace {

using namespace tagraid;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitPartial = 2;

// Options shared by every verb that works from an experiment config.
struct ConfigArgs {
  std::string config;
  std::vector<std::string> sets;
  std::string data;
  std::string synthetic;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "experiment config (JSON)")->check(CLI::ExistingFile);
    app->add_option("--set", sets, "override a config key, e.g. --set attack.budget_fraction=0.05");
    app->add_option("--data", data, "dataset directory (overrides dataset.path)");
    app->add_option("--synthetic", synthetic, "synthetic dataset profile, e.g. cora-like");
    app->add_option("--seed", seed, "run only this seed");
  }

  ExperimentConfig load(std::vector<std::string> extra = {}) const {
    std::vector<std::string> all = sets;
    if (!data.empty()) all.push_back("dataset.path=" + json(data).dump());
    if (!synthetic.empty()) all.push_back("dataset.synthetic=" + json(synthetic).dump());
    if (seed) all.push_back(fmt::format("seeds=[{}]", *seed));
    all.insert(all.end(), extra.begin(), extra.end());
    if (config.empty()) return parse_config(R"({"version": 1})", all);
    return load_config(config, all);
  }

  std::uint64_t one_seed(const ExperimentConfig& cfg) const { return seed ? *seed : cfg.seeds.front(); }
};

json budget_summary(const BudgetReport& b) {
  return {{"passed", b.passed},
          {"flip_count", b.flip_count},
          {"edge_budget", b.edge_budget},
          {"char_budget", b.char_budget},
          {"char_violations", b.char_violations.size()},
          {"degree_test_run", b.degree_test_run},
          {"degree_test_passed", b.degree_test_passed}};
}

json dataset_summary(const TextAttributedGraph& g) {
  return {{"nodes", g.node_count()},
          {"edges", g.edge_count()},
          {"classes", g.num_classes()},
          {"mean_text_length", g.mean_text_length()},
          {"train", g.nodes_with(SplitTag::Train).size()},
          {"val", g.nodes_with(SplitTag::Val).size()},
          {"test", g.nodes_with(SplitTag::Test).size()}};
}

PerturbationSet read_perturbation(const std::string& path) {
  if (path.empty()) return {};
  return perturbation_from_json(read_text_file(path));
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

int ingest(const std::string& data, const std::string& generate, std::uint64_t seed, const std::string& out) {
  if (!generate.empty()) {
    if (out.empty()) throw InputError("ingest --generate needs --out");
    const TextAttributedGraph g = generate_synthetic(synth_profile(generate), seed);
    save_dataset(g, out, generate);
    print(dataset_summary(g));
    return kExitOk;
  }
  if (data.empty()) throw InputError("ingest needs --data or --generate");
  const TextAttributedGraph g = load_dataset(data);
  if (!out.empty()) save_dataset(g, out);
  print(dataset_summary(g));
  return kExitOk;
}

int attack(const ConfigArgs& args, const std::string& kind, const std::string& phase, const std::string& out) {
  const ExperimentConfig cfg = args.load();
  const std::uint64_t seed = args.one_seed(cfg);
  const AttackKind attack = attack_kind_from(kind);
  const PerturbationSet p = generate_attack(cfg, seed, attack, phase_from(phase));
  const TextAttributedGraph clean = seed_graph(cfg, seed);
  write_text_file(out, perturbation_to_json(p));
  print({{"seed", seed},
         {"attack", kind},
         {"flips", p.flips.size()},
         {"edited_nodes", p.text_edits.size()},
         {"budget", budget_summary(check_budget(clean, p, cfg.attack.budget_fraction))},
         {"out", out}});
  return kExitOk;
}

int defend(const ConfigArgs& args, const std::string& kind, const std::string& perturbation, const std::string& out) {
  const ExperimentConfig cfg = args.load();
  const std::uint64_t seed = args.one_seed(cfg);
  ConfusablesTable table = ConfusablesTable::builtin();
  if (!cfg.confusables.empty()) table.merge(ConfusablesTable::load(cfg.confusables));
  const TextAttributedGraph graph = apply_perturbation(seed_graph(cfg, seed), read_perturbation(perturbation), table);
  const DefendedInput d = defend_input(graph, cfg.featurizer, defense_kind_from(kind), cfg.defense, table);
  save_dataset(d.graph, out);
  json removed = json::array();
  for (const auto& f : d.removed) removed.push_back(json::array({f.u, f.v}));
  const json summary = {{"seed", seed},
                        {"defense", kind},
                        {"removed_edges", removed},
                        {"corrector_fallbacks", d.corrections.fallbacks},
                        {"unbalanced_texts", d.corrections.unbalanced}};
  write_text_file(std::filesystem::path(out) / "defense.json", summary.dump(2) + "\n");
  print({{"seed", seed},
         {"defense", kind},
         {"removed_edges", d.removed.size()},
         {"corrector_fallbacks", d.corrections.fallbacks.size()},
         {"out", out}});
  return kExitOk;
}

int eval(const ConfigArgs& args, const std::string& victim, const std::string& phase, const std::string& defense,
         const std::string& perturbation, const std::string& victim_file) {
  const ExperimentConfig cfg = args.load();
  const std::uint64_t seed = args.one_seed(cfg);
  std::optional<std::filesystem::path> file;
  if (!victim_file.empty()) file = victim_file;
  const SeedOutcome o = evaluate_perturbation(cfg, seed, victim_kind_from(victim), phase_from(phase),
                                              defense_kind_from(defense), read_perturbation(perturbation), file);
  if (!o.accuracy) throw Error(o.error);
  print({{"seed", seed},
         {"victim", victim},
         {"phase", phase},
         {"defense", defense},
         {"accuracy", *o.accuracy},
         {"budget", budget_summary(o.budget)},
         {"purified_edges", o.purified_edges},
         {"corrector_fallbacks", o.corrector_fallbacks}});
  return kExitOk;
}

int run(const ConfigArgs& args, const std::string& out, bool quiet) {
  ExperimentConfig cfg;
  try {
    cfg = args.load();
  } catch (const Error& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitError;
  }
  if (!out.empty()) cfg.output = out;
  RunOptions options;
  if (!quiet) options.progress = [](std::string_view line) { fmt::print(stderr, "{}\n", line); };
  const ExperimentReport report = run_experiment(cfg, options);
  emit_report(std::span(&report, 1), cfg.output);
  std::cout << report_table_csv(std::span(&report, 1));
  for (const auto& d : report.diagnostics) fmt::print(stderr, "diagnostic: {}\n", d);
  return report.partial ? kExitPartial : kExitOk;
}

int report(const std::vector<std::string>& inputs, const std::string& out) {
  std::vector<ExperimentReport> reports;
  for (const auto& in : inputs) {
    auto rs = reports_from_json(read_text_file(in));
    reports.insert(reports.end(), std::make_move_iterator(rs.begin()), std::make_move_iterator(rs.end()));
  }
  if (!out.empty()) emit_report(reports, out);
  std::cout << report_table_csv(reports);
  bool partial = false;
  for (const auto& r : reports) partial = partial || r.partial;
  return partial ? kExitPartial : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tag-raid: adversarial attacks and defenses for text-attributed graph learners"};
  app.set_version_flag("--version", std::string(version_string()));
  app.require_subcommand(1);

  std::string data, generate, out, kind, phase = "evasion", defense = "none", victim = "sequence";
  std::string perturbation, victim_file;
  std::uint64_t gen_seed = 1;
  bool quiet = false;
  std::vector<std::string> inputs;

  auto* ingest_cmd = app.add_subcommand("ingest", "validate a dataset directory or generate a synthetic one");
  ingest_cmd->add_option("--data", data, "dataset directory")->check(CLI::ExistingDirectory);
  ingest_cmd->add_option("--generate", generate, "synthetic profile: cora-like, citeseer-like, pubmed-like");
  ingest_cmd->add_option("--seed", gen_seed, "generator seed");
  ingest_cmd->add_option("--out", out, "write the (normalised or generated) dataset here");

  ConfigArgs attack_args;
  auto* attack_cmd = app.add_subcommand("attack", "generate a perturbation for one seed");
  attack_args.attach(attack_cmd);
  attack_cmd->add_option("--attack", kind, "nettack, metattack, ni, si, msi, feature, unified")->required();
  attack_cmd->add_option("--phase", phase, "poisoning or evasion (injection targets depend on it)");
  attack_cmd->add_option("--out", out, "perturbation JSON")->required();

  ConfigArgs defend_args;
  auto* defend_cmd = app.add_subcommand("defend", "correct texts and purify edges of a (perturbed) graph");
  defend_args.attach(defend_cmd);
  defend_cmd->add_option("--defense", kind, "galguard_p or galguard")->required();
  defend_cmd->add_option("--perturbation", perturbation, "perturbation JSON to apply first")->check(CLI::ExistingFile);
  defend_cmd->add_option("--out", out, "output dataset directory")->required();

  ConfigArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "score one victim under a perturbation");
  eval_args.attach(eval_cmd);
  eval_cmd->add_option("--victim", victim, "sequence, gnn or surrogate");
  eval_cmd->add_option("--phase", phase, "poisoning or evasion");
  eval_cmd->add_option("--defense", defense, "none, galguard_p or galguard");
  eval_cmd->add_option("--perturbation", perturbation, "perturbation JSON (default: clean)")->check(CLI::ExistingFile);
  eval_cmd->add_option("--victim-file", victim_file, "evasion: load the clean victim from here, or save it after training");

  ConfigArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "run the full experiment matrix and write report.json and table.csv");
  run_args.attach(run_cmd);
  run_cmd->add_option("--out", out, "output directory (overrides \"output\")");
  run_cmd->add_flag("--quiet", quiet, "no progress lines");

  auto* report_cmd = app.add_subcommand("report", "merge report.json files into one table");
  report_cmd->add_option("inputs", inputs, "report.json files")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--out", out, "write merged report.json and table.csv here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  try {
    if (*ingest_cmd) return ingest(data, generate, gen_seed, out);
    if (*attack_cmd) return attack(attack_args, kind, phase, out);
    if (*defend_cmd) return defend(defend_args, kind, perturbation, out);
    if (*eval_cmd) return eval(eval_args, victim, phase, defense, perturbation, victim_file);
    if (*run_cmd) return run(run_args, out, quiet);
    if (*report_cmd) return report(inputs, out);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitError;
  }
  return kExitError;
}
