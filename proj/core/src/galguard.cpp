#include "tagraid/galguard.hpp"

#include <thread>

#include <fmt/format.h>

#include "parallel.hpp"
#include "tagraid/corrector.hpp"
#include "tagraid/error.hpp"
#include "tagraid/sanitize.hpp"

namespace tagraid {

void DefenseConfig::validate() const {
  auto in_range = [](double v) { return v >= -1.0 && v <= 1.0; };
  if (!in_range(tau)) throw InputError(fmt::format("defense: tau must be in [-1, 1] (got {})", tau));
  if (!in_range(prune_p0)) throw InputError(fmt::format("defense: prune_p0 must be in [-1, 1] (got {})", prune_p0));
  if (tree_tau && !in_range(*tree_tau)) throw InputError("defense: tree_tau must be in [-1, 1]");
  if (!(smoothing_rho >= 0.0 && smoothing_rho <= 1.0)) throw InputError("defense: smoothing_rho must be in [0, 1]");
  if (m_global_dim < 0) throw InputError("defense: m_global_dim must be >= 0");
  if (corrector == CorrectorKind::Remote) {
    if (remote.endpoint.empty()) throw InputError("defense: remote corrector needs an endpoint");
    if (!(remote.timeout_seconds > 0.0)) throw InputError("defense: remote timeout must be positive");
    if (remote.max_in_flight < 1) throw InputError("defense: max_in_flight must be >= 1");
  }
}

std::string_view to_string(DefenseKind kind) {
  switch (kind) {
    case DefenseKind::None: return "none";
    case DefenseKind::GaLGuardP: return "galguard_p";
    case DefenseKind::GaLGuard: return "galguard";
  }
  return "?";
}

DefenseKind defense_kind_from(std::string_view name) {
  if (name == "none") return DefenseKind::None;
  if (name == "galguard_p" || name == "GaLGuard_p") return DefenseKind::GaLGuardP;
  if (name == "galguard" || name == "GaLGuard") return DefenseKind::GaLGuard;
  throw InputError(fmt::format("unknown defense \"{}\"", name));
}

std::vector<EdgeFlip> purify_edges(const TextAttributedGraph& graph, const FeatureMatrix& features, double tau) {
  if (features.rows() != graph.node_count()) throw InputError("purify_edges: feature rows differ from node count");
  std::vector<EdgeFlip> out;
  for (const auto& e : graph.edges()) {
    const double c = cosine(features.values.row(e.u).transpose(), features.values.row(e.v).transpose());
    if (c < tau) out.push_back({e.u, e.v, FlipOp::Remove});
  }
  return out;
}

GuardWeights guard_weights(const FeatureMatrix& features, const TextAttributedGraph& graph, double prune_p0,
                           double smoothing_rho, const GuardWeights* previous) {
  if (features.rows() != graph.node_count()) throw InputError("guard_weights: feature rows differ from node count");
  const std::size_t n = graph.node_count();
  GuardWeights g;
  g.offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) g.offsets[i + 1] = g.offsets[i] + graph.degree(static_cast<NodeId>(i));
  g.weights.assign(g.offsets.back(), 0.0);
  if (previous && previous->weights.size() != g.weights.size()) {
    throw InputError("guard_weights: previous layer weights do not match the graph");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto u = static_cast<NodeId>(i);
    const auto nb = graph.neighbors(u);
    double total = 0.0;
    for (std::size_t j = 0; j < nb.size(); ++j) {
      double w = std::max(0.0, cosine(features.values.row(u).transpose(), features.values.row(nb[j]).transpose()));
      if (w < prune_p0) w = 0.0;
      g.weights[g.offsets[i] + j] = w;
      total += w;
    }
    if (total > 0.0) {
      for (std::size_t j = 0; j < nb.size(); ++j) g.weights[g.offsets[i] + j] /= total;
    } else if (!nb.empty()) {
      g.self_only.push_back(u);
    }
    if (previous) {
      for (std::size_t j = 0; j < nb.size(); ++j) {
        auto& w = g.weights[g.offsets[i] + j];
        w = smoothing_rho * previous->weights[g.offsets[i] + j] + (1.0 - smoothing_rho) * w;
      }
    }
  }
  return g;
}

ComputationTree purified_tree(const TextAttributedGraph& graph, NodeId u, int d, int k, std::uint64_t seed,
                              const FeatureMatrix& features, double tau) {
  const Matrix* x = &features.values;
  return build_tree(graph, u, TreeOptions{d, k, true}, seed, nullptr, [x, tau](NodeId parent, NodeId child) {
    return cosine(x->row(parent).transpose(), x->row(child).transpose()) >= tau;
  });
}

CorrectionReport correct_texts(std::span<const std::string> texts, const DefenseConfig& defense,
                               const ConfusablesTable& table) {
  CorrectionReport report;
  report.texts.resize(texts.size());
  std::vector<char> unbalanced(texts.size(), 0), fallback(texts.size(), 0);
  if (defense.corrector == CorrectorKind::RuleBased) {
    detail::parallel_for(texts.size(), [&](std::size_t i) {
      bool flag = false;
      report.texts[i] = sanitize_text(texts[i], table, &flag);
      unbalanced[i] = flag ? 1 : 0;
    });
  } else {
    const RemoteCorrector client(defense.remote, table);
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(defense.remote.max_in_flight), texts.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < texts.size(); i += workers) {
          auto r = client.correct(texts[i]);
          report.texts[i] = std::move(r.text);
          fallback[i] = r.fallback ? 1 : 0;
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (unbalanced[i]) report.unbalanced.push_back(static_cast<NodeId>(i));
    if (fallback[i]) report.fallbacks.push_back(static_cast<NodeId>(i));
  }
  return report;
}

DefendedInput defend_input(const TextAttributedGraph& graph, const FeaturizerConfig& featurizer, DefenseKind kind,
                           const DefenseConfig& defense, const ConfusablesTable& table) {
  DefendedInput out;
  if (kind == DefenseKind::None) {
    out.graph = graph;
    out.features = embed_all(graph, featurizer);
    return out;
  }
  defense.validate();
  out.corrections = correct_texts(graph.texts(), defense, table);
  const TextAttributedGraph corrected = graph.with_texts(out.corrections.texts);
  out.features = embed_all(corrected, featurizer);
  out.removed = purify_edges(corrected, out.features, defense.tau);
  out.graph = apply_flips(corrected, out.removed);
  return out;
}

VictimParams train_victim(const VictimSpec& spec, const TextAttributedGraph& graph, const FeatureMatrix& features) {
  switch (spec.kind) {
    case VictimKind::Surrogate:
      return train_surrogate(graph, features, spec.train);
    case VictimKind::Sequence:
      return train_sequence_victim(graph, features, spec.sequence, spec.train);
    case VictimKind::Gnn:
      return train_gnn_victim(graph, features, spec.gnn, spec.train);
  }
  throw InputError("unknown victim kind");
}

VictimParams train_defended(const VictimSpec& spec, DefenseKind kind, const DefendedInput& input,
                            const DefenseConfig& defense) {
  if (kind != DefenseKind::GaLGuard) return train_victim(spec, input.graph, input.features);
  defense.validate();
  VictimSpec hardened = spec;
  switch (spec.kind) {
    case VictimKind::Sequence:
      hardened.sequence.m_global_dim = defense.m_global_dim > 0 ? defense.m_global_dim : input.features.dim();
      hardened.sequence.tree_filter = defense.tree_tau ? *defense.tree_tau : defense.prune_p0;
      break;
    case VictimKind::Gnn:
      hardened.gnn.guard = GuardSettings{defense.prune_p0, defense.smoothing_rho};
      break;
    case VictimKind::Surrogate:
      break;
  }
  return train_victim(hardened, input.graph, input.features);
}

}  // namespace tagraid
