#include "tagraid/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "tagraid/error.hpp"
#include "tagraid/rng.hpp"

namespace tagraid {

namespace {

constexpr const char* kOnsets[] = {"b", "c", "d", "f", "g", "h", "l", "m", "n", "p", "r", "s", "t", "v",
                                   "w", "st", "tr", "pr", "gr", "pl", "cl", "br", "th", "sh", "qu"};
constexpr const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ea", "io", "ou", "y"};
constexpr const char* kCodas[] = {"", "", "n", "r", "s", "l", "t", "m", "nd", "rk", "ct", "x"};

std::string make_word(Rng& rng) {
  std::string w;
  const std::size_t syllables = 2 + rng.below(2);
  for (std::size_t s = 0; s < syllables; ++s) {
    w += kOnsets[rng.below(std::size(kOnsets))];
    w += kVowels[rng.below(std::size(kVowels))];
    if (s + 1 == syllables || rng.uniform() < 0.3) w += kCodas[rng.below(std::size(kCodas))];
  }
  return w;
}

std::vector<std::string> make_vocab(Rng& rng, std::size_t size, std::set<std::string>& used) {
  std::vector<std::string> out;
  while (out.size() < size) {
    auto w = make_word(rng);
    if (used.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

/// Sampler proportional to fixed weights (inverse CDF by binary search).
class WeightedPicker {
 public:
  WeightedPicker() = default;
  void add(NodeId id, double w) {
    ids_.push_back(id);
    total_ += w;
    cumulative_.push_back(total_);
  }
  bool empty() const noexcept { return ids_.empty(); }
  NodeId pick(Rng& rng) const {
    const double x = rng.uniform() * total_;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
    if (it == cumulative_.end()) --it;
    return ids_[static_cast<std::size_t>(it - cumulative_.begin())];
  }

 private:
  std::vector<NodeId> ids_;
  std::vector<double> cumulative_;
  double total_ = 0.0;
};

}  // namespace

std::size_t SynthProfile::nodes() const noexcept {
  std::size_t n = 0;
  for (auto s : class_sizes) n += s;
  return n;
}

SynthProfile cora_like() {
  SynthProfile p;
  p.name = "cora-like";
  p.class_names = {"Theory", "Reinforcement_Learning", "Genetic_Algorithms", "Neural_Networks",
                   "Probabilistic_Methods", "Case_Based", "Rule_Learning"};
  p.class_sizes = {351, 217, 418, 818, 426, 298, 180};
  p.edges = 5429;
  return p;
}

SynthProfile citeseer_like() {
  SynthProfile p;
  p.name = "citeseer-like";
  p.class_names = {"Agents", "AI", "DB", "IR", "ML", "HCI"};
  p.class_sizes = {596, 249, 701, 668, 590, 523};
  p.edges = 4614;
  p.homophily = 0.74;
  return p;
}

SynthProfile pubmed_like() {
  SynthProfile p;
  p.name = "pubmed-like";
  p.class_names = {"Experimental", "Type1", "Type2"};
  p.class_sizes = {4103, 7739, 7875};
  p.edges = 44338;
  return p;
}

SynthProfile synth_profile(const std::string& name) {
  if (name == "cora-like") return cora_like();
  if (name == "citeseer-like") return citeseer_like();
  if (name == "pubmed-like") return pubmed_like();
  throw InputError(fmt::format("unknown synthetic profile \"{}\"", name));
}

TextAttributedGraph generate_synthetic(const SynthProfile& profile, std::uint64_t seed) {
  const std::size_t n = profile.nodes();
  const std::size_t c = profile.class_sizes.size();
  if (n < 2 || c == 0) throw InputError("synthetic profile needs at least two nodes and one class");
  if (profile.edges < n / 2 || profile.edges > n * (n - 1) / 4) {
    throw InputError(fmt::format("synthetic profile: {} edges is out of range for {} nodes", profile.edges, n));
  }

  // Labels, shuffled so class blocks are not contiguous.
  std::vector<int> labels;
  labels.reserve(n);
  for (std::size_t k = 0; k < c; ++k) labels.insert(labels.end(), profile.class_sizes[k], static_cast<int>(k));
  Rng label_rng(derive_seed(seed, "synth.labels"));
  label_rng.shuffle(labels);

  // Heavy-tailed attachment weights.
  Rng weight_rng(derive_seed(seed, "synth.weights"));
  std::vector<double> weight(n);
  for (auto& w : weight) w = std::pow(1.0 - weight_rng.uniform(), -1.0 / (profile.weight_tail - 1.0));
  std::vector<WeightedPicker> in_class(c);
  WeightedPicker everyone;
  for (std::size_t i = 0; i < n; ++i) {
    in_class[static_cast<std::size_t>(labels[i])].add(static_cast<NodeId>(i), weight[i]);
    everyone.add(static_cast<NodeId>(i), weight[i]);
  }

  Rng edge_rng(derive_seed(seed, "synth.edges"));
  std::set<Edge> edges;
  auto partner = [&](NodeId u) {
    const auto cu = static_cast<std::size_t>(labels[static_cast<std::size_t>(u)]);
    if (edge_rng.uniform() < profile.homophily) return in_class[cu].pick(edge_rng);
    for (;;) {
      const NodeId v = everyone.pick(edge_rng);
      if (labels[static_cast<std::size_t>(v)] != labels[static_cast<std::size_t>(u)] || c == 1) return v;
    }
  };
  // Every node gets one edge, then the rest follow the weights.
  std::vector<NodeId> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<NodeId>(i);
  edge_rng.shuffle(order);
  for (NodeId u : order) {
    if (edges.size() >= profile.edges) break;
    for (int attempt = 0; attempt < 64; ++attempt) {
      const NodeId v = partner(u);
      if (v != u && edges.insert(make_edge(u, v)).second) break;
    }
  }
  while (edges.size() < profile.edges) {
    const NodeId u = everyone.pick(edge_rng);
    const NodeId v = partner(u);
    if (u != v) edges.insert(make_edge(u, v));
  }

  // Vocabularies and texts.
  Rng vocab_rng(derive_seed(seed, "synth.vocab"));
  std::set<std::string> used;
  const auto shared = make_vocab(vocab_rng, profile.shared_vocab, used);
  std::vector<std::vector<std::string>> topic(c);
  for (auto& t : topic) t = make_vocab(vocab_rng, profile.topic_vocab, used);

  std::vector<std::string> texts(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, "synth.text", i));
    const auto own = static_cast<std::size_t>(labels[i]);
    std::size_t other = own;
    if (c > 1) {
      other = rng.below(c - 1);
      if (other >= own) ++other;
    }
    const double p_topic = profile.topic_min + (profile.topic_max - profile.topic_min) * rng.uniform();
    auto word = [&] {
      const double x = rng.uniform();
      if (x < p_topic) return topic[own][rng.below(topic[own].size())];
      if (x < p_topic + profile.cross_topic) return topic[other][rng.below(topic[other].size())];
      return shared[rng.below(shared.size())];
    };
    auto sentence = [&](std::size_t words, std::string& out) {
      for (std::size_t w = 0; w < words; ++w) {
        std::string token = word();
        if (w == 0) token[0] = static_cast<char>(token[0] - 'a' + 'A');
        out += token;
        out += (w + 1 == words) ? ". " : " ";
      }
    };
    std::string text = "Title: ";
    sentence(5 + rng.below(6), text);
    text += "Abstract: ";
    std::size_t remaining = profile.abstract_words + rng.below(profile.abstract_words / 3 + 1);
    while (remaining > 0) {
      const std::size_t len = std::min<std::size_t>(remaining, 8 + rng.below(12));
      sentence(len, text);
      remaining -= len;
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    texts[i] = std::move(text);
  }

  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = fmt::format("{}-{}", profile.name, i);
  return TextAttributedGraph(std::move(texts), std::move(labels), static_cast<int>(c),
                             std::vector<Edge>(edges.begin(), edges.end()), {}, std::move(ids),
                             profile.class_names);
}

}  // namespace tagraid
