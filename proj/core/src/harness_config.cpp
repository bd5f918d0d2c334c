#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "tagraid/dataset_io.hpp"
#include "tagraid/error.hpp"
#include "tagraid/harness.hpp"
#include "tagraid/rng.hpp"
#include "tagraid/serialize.hpp"
#include "tagraid/synth.hpp"

namespace tagraid {

using nlohmann::json;

std::string_view to_string(Phase phase) { return phase == Phase::Poisoning ? "poisoning" : "evasion"; }

Phase phase_from(std::string_view name) {
  if (name == "poisoning") return Phase::Poisoning;
  if (name == "evasion") return Phase::Evasion;
  throw InputError(fmt::format("unknown phase \"{}\"", name));
}

namespace {

constexpr std::pair<AttackKind, std::string_view> kAttackNames[] = {
    {AttackKind::None, "none"}, {AttackKind::Nettack, "nettack"}, {AttackKind::Metattack, "metattack"},
    {AttackKind::NI, "ni"},     {AttackKind::SI, "si"},           {AttackKind::MSI, "msi"},
    {AttackKind::Feature, "feature"}, {AttackKind::Unified, "unified"},
};

// Object reader that remembers which keys were consumed, so leftovers can
// be reported as typos.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw InputError(fmt::format("config: {} must be an object", where()));
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw InputError(fmt::format("config: {}.{} has the wrong type", where(), key));
    }
  }

  template <typename T>
  void get_optional(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if (j_.at(key).is_null()) {
      out.reset();
      return;
    }
    T value{};
    get(key, value);
    out = value;
  }

  template <typename T, typename Parse>
  void get_list(const char* key, std::vector<T>& out, Parse&& parse) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& arr = j_.at(key);
    if (!arr.is_array()) throw InputError(fmt::format("config: {}.{} must be an array", where(), key));
    out.clear();
    for (const auto& item : arr) {
      if (!item.is_string()) throw InputError(fmt::format("config: {}.{} entries must be strings", where(), key));
      out.push_back(parse(item.get<std::string>()));
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string sub(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.contains(key)) throw InputError(fmt::format("config: unknown key \"{}\"", sub(key.c_str())));
    }
  }

 private:
  std::string where() const { return path_.empty() ? "top level" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_train(const json& j, const std::string& path, TrainConfig& t) {
  Reader r(j, path);
  r.get("epochs", t.epochs);
  r.get("learning_rate", t.learning_rate);
  r.get("hidden", t.hidden);
  r.get("weight_decay", t.weight_decay);
  r.finish();
}

json train_json(const TrainConfig& t) {
  return {{"epochs", t.epochs}, {"learning_rate", t.learning_rate}, {"hidden", t.hidden},
          {"weight_decay", t.weight_decay}};
}

void read_attack(const json& j, AttackSettings& a) {
  Reader r(j, "attack");
  r.get("budget_fraction", a.budget_fraction);
  r.get("nettack_per_target", a.nettack_per_target);
  r.get("text_all_nodes", a.text_all_nodes);
  r.get("cap_injection", a.cap_injection);
  r.get("max_dense_nodes", a.max_dense_nodes);
  r.get("subgraph_nodes", a.subgraph_nodes);
  if (const json* m = r.child("metattack")) {
    Reader mr(*m, "attack.metattack");
    mr.get("unroll_t", a.metattack.unroll_t);
    mr.get("inner_lr", a.metattack.inner_lr);
    mr.get("weight_decay", a.metattack.weight_decay);
    mr.get("self_training", a.metattack.self_training);
    mr.finish();
  }
  if (const json* d = r.child("de")) {
    Reader dr(*d, "attack.de");
    dr.get("population", a.de.population);
    dr.get("f", a.de.f);
    dr.get("cr", a.de.cr);
    dr.get("generations", a.de.generations);
    dr.finish();
  }
  r.finish();
}

void read_defense(const json& j, DefenseConfig& d) {
  Reader r(j, "defense");
  r.get("tau", d.tau);
  r.get("prune_p0", d.prune_p0);
  r.get("smoothing_rho", d.smoothing_rho);
  r.get("m_global_dim", d.m_global_dim);
  r.get_optional("tree_tau", d.tree_tau);
  std::string corrector = d.corrector == CorrectorKind::Remote ? "remote" : "rule_based";
  r.get("corrector", corrector);
  if (corrector == "rule_based") {
    d.corrector = CorrectorKind::RuleBased;
  } else if (corrector == "remote") {
    d.corrector = CorrectorKind::Remote;
  } else {
    throw InputError(fmt::format("config: defense.corrector must be rule_based or remote (got \"{}\")", corrector));
  }
  if (const json* rem = r.child("remote")) {
    Reader rr(*rem, "defense.remote");
    rr.get("endpoint", d.remote.endpoint);
    rr.get("path", d.remote.path);
    rr.get("model", d.remote.model);
    rr.get("api_key_env", d.remote.api_key_env);
    rr.get("timeout_seconds", d.remote.timeout_seconds);
    rr.get("max_in_flight", d.remote.max_in_flight);
    rr.get("prompt_file", d.remote.prompt_file);
    rr.finish();
  }
  r.finish();
}

ExperimentConfig from_json(const json& root) {
  ExperimentConfig cfg;
  Reader r(root, "");
  if (!root.contains("version")) throw InputError("config: missing top-level \"version\"");
  r.get("version", cfg.version);
  if (cfg.version != kConfigVersion) {
    throw InputError(fmt::format("config: unsupported version {} (expected {})", cfg.version, kConfigVersion));
  }
  r.get("name", cfg.name);
  if (const json* d = r.child("dataset")) {
    Reader dr(*d, "dataset");
    dr.get("path", cfg.dataset.path);
    dr.get("synthetic", cfg.dataset.synthetic);
    dr.get("synthetic_seed", cfg.dataset.synthetic_seed);
    dr.get("label", cfg.dataset.label);
    dr.finish();
  }
  if (const json* s = r.child("split")) {
    Reader sr(*s, "split");
    sr.get("train", cfg.split.train);
    sr.get("val", cfg.split.val);
    sr.get("test", cfg.split.test);
    sr.get("use_dataset_split", cfg.dataset_split);
    sr.finish();
  }
  if (const json* f = r.child("featurizer")) {
    Reader fr(*f, "featurizer");
    fr.get("dim", cfg.featurizer.dim);
    fr.get("ngram", cfg.featurizer.ngram);
    fr.get("seed", cfg.featurizer.seed);
    fr.finish();
  }
  r.get("seeds", cfg.seeds);
  r.get_list("victims", cfg.victims, [](const std::string& s) { return victim_kind_from(s); });
  r.get_list("attacks", cfg.attacks, [](const std::string& s) { return attack_kind_from(s); });
  r.get_list("phases", cfg.phases, [](const std::string& s) { return phase_from(s); });
  r.get_list("defenses", cfg.defenses, [](const std::string& s) { return defense_kind_from(s); });
  if (const json* t = r.child("train")) {
    Reader tr(*t, "train");
    if (const json* x = tr.child("surrogate")) read_train(*x, "train.surrogate", cfg.surrogate_train);
    if (const json* x = tr.child("sequence")) read_train(*x, "train.sequence", cfg.sequence_train);
    if (const json* x = tr.child("gnn")) read_train(*x, "train.gnn", cfg.gnn_train);
    tr.finish();
  }
  if (const json* t = r.child("tree")) {
    Reader tr(*t, "tree");
    tr.get("depth", cfg.tree.depth);
    tr.get("fanout", cfg.tree.fanout);
    tr.get("original_first", cfg.tree.original_first);
    tr.finish();
  }
  if (const json* g = r.child("gnn")) {
    Reader gr(*g, "gnn");
    gr.get("attention_width", cfg.gnn.attention_width);
    gr.get("residual", cfg.gnn.residual);
    gr.finish();
  }
  if (const json* a = r.child("attack")) read_attack(*a, cfg.attack);
  if (const json* d = r.child("defense")) read_defense(*d, cfg.defense);
  r.get("confusables", cfg.confusables);
  r.get("cache_dir", cfg.cache_dir);
  r.get("output", cfg.output);
  r.finish();
  cfg.validate();
  return cfg;
}

void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw InputError(fmt::format("override \"{}\" must look like key.path=value", assignment));
  }
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* at = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw InputError(fmt::format("override \"{}\" has an empty key segment", assignment));
    if (!at->is_object()) throw InputError(fmt::format("override \"{}\" descends into a non-object", assignment));
    if (dot == std::string::npos) {
      (*at)[key] = std::move(value);
      return;
    }
    at = &(*at)[key];
    if (at->is_null()) *at = json::object();
    start = dot + 1;
  }
}

template <typename T>
json names(const std::vector<T>& items) {
  json arr = json::array();
  for (const auto& x : items) arr.push_back(std::string(to_string(x)));
  return arr;
}

}  // namespace

std::string_view to_string(AttackKind kind) {
  for (const auto& [k, name] : kAttackNames) {
    if (k == kind) return name;
  }
  return "?";
}

AttackKind attack_kind_from(std::string_view name) {
  for (const auto& [k, n] : kAttackNames) {
    if (n == name) return k;
  }
  throw InputError(fmt::format("unknown attack \"{}\"", name));
}

ExperimentConfig::ExperimentConfig() {
  // Calibrated on the Cora-scale graph; see configs/defaults.json.
  surrogate_train.learning_rate = 50.0;
  surrogate_train.weight_decay = 1e-5;
  sequence_train.epochs = 100;
  sequence_train.learning_rate = 0.005;
  sequence_train.weight_decay = 1e-5;
  gnn_train.epochs = 100;
  gnn_train.learning_rate = 0.005;
  gnn_train.weight_decay = 1e-5;
  attack.metattack.unroll_t = 10;
  attack.metattack.inner_lr = 10.0;
  attack.metattack.weight_decay = 1e-5;
}

void ExperimentConfig::validate() const {
  if (version != kConfigVersion) throw InputError(fmt::format("config: unsupported version {}", version));
  if (dataset.path.empty() == dataset.synthetic.empty()) {
    throw InputError("config: dataset needs exactly one of \"path\" or \"synthetic\"");
  }
  if (!dataset.synthetic.empty()) (void)synth_profile(dataset.synthetic);
  const double total = split.train + split.val + split.test;
  if (split.train <= 0.0 || split.val < 0.0 || split.test <= 0.0 || std::abs(total - 1.0) > 1e-9) {
    throw InputError("config: split ratios must be non-negative, with train and test positive, and sum to 1");
  }
  featurizer.validate();
  if (seeds.empty()) throw InputError("config: seeds must not be empty");
  if (victims.empty() || attacks.empty() || phases.empty() || defenses.empty()) {
    throw InputError("config: victims, attacks, phases and defenses must be non-empty");
  }
  surrogate_train.validate();
  sequence_train.validate();
  gnn_train.validate();
  if (tree.depth < 1 || tree.fanout < 1) throw InputError("config: tree depth and fanout must be >= 1");
  if (gnn.attention_width < 1) throw InputError("config: gnn.attention_width must be >= 1");
  if (!(attack.budget_fraction > 0.0 && attack.budget_fraction <= 1.0)) {
    throw InputError("config: attack.budget_fraction must be in (0, 1]");
  }
  if (attack.nettack_per_target < 1) throw InputError("config: attack.nettack_per_target must be >= 1");
  MetattackConfig m = attack.metattack;
  m.fraction = attack.budget_fraction;
  m.validate();
  attack.de.validate();
  if (attack.subgraph_nodes < 2 || attack.subgraph_nodes > attack.max_dense_nodes) {
    throw InputError("config: attack.subgraph_nodes must be in [2, max_dense_nodes]");
  }
  defense.validate();
}

ExperimentConfig parse_config(std::string_view json_text, std::span<const std::string> overrides) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputError(fmt::format("config: {}", e.what()));
  }
  for (const auto& o : overrides) apply_override(root, o);
  return from_json(root);
}

ExperimentConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides) {
  return parse_config(read_text_file(path), overrides);
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["version"] = c.version;
  j["name"] = c.name;
  j["dataset"] = {{"path", c.dataset.path},
                  {"synthetic", c.dataset.synthetic},
                  {"synthetic_seed", c.dataset.synthetic_seed},
                  {"label", c.dataset.label}};
  j["split"] = {{"train", c.split.train},
                {"val", c.split.val},
                {"test", c.split.test},
                {"use_dataset_split", c.dataset_split}};
  j["featurizer"] = {{"dim", c.featurizer.dim}, {"ngram", c.featurizer.ngram}, {"seed", c.featurizer.seed}};
  j["seeds"] = c.seeds;
  j["victims"] = names(c.victims);
  j["attacks"] = names(c.attacks);
  j["phases"] = names(c.phases);
  j["defenses"] = names(c.defenses);
  j["train"] = {{"surrogate", train_json(c.surrogate_train)},
                {"sequence", train_json(c.sequence_train)},
                {"gnn", train_json(c.gnn_train)}};
  j["tree"] = {{"depth", c.tree.depth}, {"fanout", c.tree.fanout}, {"original_first", c.tree.original_first}};
  j["gnn"] = {{"attention_width", c.gnn.attention_width}, {"residual", c.gnn.residual}};
  const auto& a = c.attack;
  j["attack"] = {{"budget_fraction", a.budget_fraction},
                 {"nettack_per_target", a.nettack_per_target},
                 {"text_all_nodes", a.text_all_nodes},
                 {"cap_injection", a.cap_injection},
                 {"max_dense_nodes", a.max_dense_nodes},
                 {"subgraph_nodes", a.subgraph_nodes},
                 {"metattack",
                  {{"unroll_t", a.metattack.unroll_t},
                   {"inner_lr", a.metattack.inner_lr},
                   {"weight_decay", a.metattack.weight_decay},
                   {"self_training", a.metattack.self_training}}},
                 {"de",
                  {{"population", a.de.population},
                   {"f", a.de.f},
                   {"cr", a.de.cr},
                   {"generations", a.de.generations}}}};
  const auto& d = c.defense;
  j["defense"] = {{"tau", d.tau},
                  {"prune_p0", d.prune_p0},
                  {"smoothing_rho", d.smoothing_rho},
                  {"m_global_dim", d.m_global_dim},
                  {"tree_tau", d.tree_tau ? json(*d.tree_tau) : json(nullptr)},
                  {"corrector", d.corrector == CorrectorKind::Remote ? "remote" : "rule_based"},
                  {"remote",
                   {{"endpoint", d.remote.endpoint},
                    {"path", d.remote.path},
                    {"model", d.remote.model},
                    {"api_key_env", d.remote.api_key_env},
                    {"timeout_seconds", d.remote.timeout_seconds},
                    {"max_in_flight", d.remote.max_in_flight},
                    {"prompt_file", d.remote.prompt_file}}}};
  j["confusables"] = c.confusables;
  j["cache_dir"] = c.cache_dir;
  j["output"] = c.output;
  return j.dump(2);
}

std::uint64_t config_digest(const ExperimentConfig& cfg) { return fnv1a64(config_to_json(cfg)); }

std::string dataset_label(const DatasetSpec& spec) {
  if (!spec.label.empty()) return spec.label;
  if (!spec.synthetic.empty()) return spec.synthetic;
  return std::filesystem::path(spec.path).filename().string();
}

TextAttributedGraph load_experiment_graph(const DatasetSpec& spec) {
  if (!spec.synthetic.empty()) return generate_synthetic(synth_profile(spec.synthetic), spec.synthetic_seed);
  return load_dataset(spec.path);
}

}  // namespace tagraid
