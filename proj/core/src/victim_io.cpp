#include <bit>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "tagraid/error.hpp"
#include "victims_internal.hpp"

namespace tagraid {

namespace {

template <typename... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <typename... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

std::uint64_t digest_of(const VictimParams& v) {
  return std::visit([](const auto& p) { return p.feature_digest; }, v);
}

// Little-endian binary writer and reader.
class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) { bytes(v, 4); }
  void u64(std::uint64_t v) { bytes(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void i32(int v) { u32(static_cast<std::uint32_t>(v)); }
  void matrix(const Matrix& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) f64(m.data()[i]);
  }
  void vector(const Vector& v) {
    u64(static_cast<std::uint64_t>(v.size()));
    for (double x : v) f64(x);
  }
  void mlp(const Mlp& m) {
    matrix(m.w1);
    vector(m.b1);
    matrix(m.w2);
    vector(m.b2);
  }

 private:
  void bytes(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.put(static_cast<char>((v >> (8 * i)) & 0xffU));
  }
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(bytes(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(bytes(4)); }
  std::uint64_t u64() { return bytes(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  int i32() { return static_cast<int>(u32()); }
  Matrix matrix() {
    const auto rows = u64();
    const auto cols = u64();
    if (rows > (1ULL << 26) || cols > (1ULL << 26) || rows * cols > (1ULL << 30)) fail("matrix size out of range");
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = f64();
    return m;
  }
  Vector vector() {
    const auto n = u64();
    if (n > (1ULL << 30)) fail("vector size out of range");
    Vector v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = f64();
    return v;
  }
  Mlp mlp() {
    Mlp m;
    m.w1 = matrix();
    m.b1 = vector();
    m.w2 = matrix();
    m.b2 = vector();
    return m;
  }
  [[noreturn]] void fail(const std::string& what) const { throw InputError(fmt::format("{}: {}", name_, what)); }

 private:
  std::uint64_t bytes(int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      const int c = in_.get();
      if (c == std::char_traits<char>::eof()) fail("truncated file");
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
  }
  std::istream& in_;
  std::string name_;
};

constexpr char kMagic[4] = {'T', 'G', 'R', 'V'};

}  // namespace

std::vector<double> flatten(const VictimParams& params) {
  std::vector<double> out;
  std::visit(Overloaded{
                 [&](const SurrogateParams& p) { detail::append(out, p.w); },
                 [&](const SequenceVictimParams& p) {
                   detail::append(out, p.placeholder);
                   out.push_back(p.pe_weight);
                   detail::append(out, p.projector);
                   if (p.m_global) detail::append(out, *p.m_global);
                 },
                 [&](const GnnVictimParams& p) {
                   detail::append(out, p.wa);
                   detail::append(out, p.att_src);
                   detail::append(out, p.att_dst);
                   out.push_back(p.residual);
                   detail::append(out, p.projector);
                 },
             },
             params);
  return out;
}

VictimParams unflatten(const VictimParams& like, std::span<const double> values) {
  VictimParams out = like;
  std::visit(Overloaded{
                 [&](SurrogateParams& p) { detail::read_into(values, p.w); },
                 [&](SequenceVictimParams& p) {
                   detail::read_into(values, p.placeholder);
                   if (values.empty()) throw InputError("parameter vector too short");
                   p.pe_weight = values.front();
                   values = values.subspan(1);
                   detail::read_into(values, p.projector);
                   if (p.m_global) detail::read_into(values, *p.m_global);
                 },
                 [&](GnnVictimParams& p) {
                   detail::read_into(values, p.wa);
                   detail::read_into(values, p.att_src);
                   detail::read_into(values, p.att_dst);
                   if (values.empty()) throw InputError("parameter vector too short");
                   p.residual = values.front();
                   values = values.subspan(1);
                   detail::read_into(values, p.projector);
                 },
             },
             out);
  if (!values.empty()) throw InputError("parameter vector too long");
  return out;
}

double training_objective(const VictimParams& params, const TextAttributedGraph& graph,
                          const FeatureMatrix& features, double weight_decay, std::vector<double>* grad) {
  const auto nodes = detail::train_nodes(graph);
  return std::visit(Overloaded{
                        [&](const SurrogateParams& p) {
                          return detail::surrogate_objective(p, graph, features, weight_decay, grad);
                        },
                        [&](const SequenceVictimParams& p) {
                          return detail::SequenceObjective(p, graph, features, nodes, weight_decay)(p, grad);
                        },
                        [&](const GnnVictimParams& p) {
                          return detail::GnnObjective(p, graph, features, nodes, weight_decay)(p, grad);
                        },
                    },
                    params);
}

Matrix victim_logits(const VictimParams& victim, const TextAttributedGraph& graph, const FeatureMatrix& features,
                     std::span<const NodeId> nodes, const EvalOptions& opts) {
  detail::check_digest(digest_of(victim), features, "evaluate");
  if (features.rows() != graph.node_count()) throw InputError("evaluate: feature rows differ from node count");
  for (NodeId v : nodes) {
    if (!graph.valid(v)) throw InputError(fmt::format("evaluate: invalid node {}", v));
  }
  return std::visit(
      Overloaded{
          [&](const SurrogateParams& p) {
            const Matrix all = surrogate_logits(p, normalized_adjacency(graph), features.values);
            Matrix out(static_cast<Eigen::Index>(nodes.size()), all.cols());
            for (std::size_t i = 0; i < nodes.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = all.row(nodes[i]);
            return out;
          },
          [&](const SequenceVictimParams& p) {
            Matrix input(static_cast<Eigen::Index>(nodes.size()), p.projector.w1.rows());
            for (std::size_t i = 0; i < nodes.size(); ++i) {
              const Vector row = sequence_input(p, graph, features, nodes[i], opts);
              if (row.size() != input.cols()) throw InputError("evaluate: sequence width differs from the projector");
              input.row(static_cast<Eigen::Index>(i)) = row.transpose();
            }
            return p.projector.forward(input);
          },
          [&](const GnnVictimParams& p) {
            return detail::GnnObjective(p, graph, features, nodes, 0.0).logits(p);
          },
      },
      victim);
}

double evaluate(const VictimParams& victim, const TextAttributedGraph& graph, const FeatureMatrix& features,
                SplitTag tag, const EvalOptions& opts) {
  const auto nodes = graph.nodes_with(tag);
  if (nodes.empty()) throw InputError(fmt::format("evaluate: split \"{}\" is empty", to_string(tag)));
  const auto predicted = predict(victim_logits(victim, graph, features, nodes, opts));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) correct += predicted[i] == graph.label(nodes[i]) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(nodes.size());
}

void save_victim(const VictimParams& victim, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  out.write(kMagic, 4);
  Writer w(out);
  w.u32(kVictimFormatVersion);
  w.u8(static_cast<std::uint8_t>(victim.index()));
  w.u64(digest_of(victim));
  std::visit(Overloaded{
                 [&](const SurrogateParams& p) { w.matrix(p.w); },
                 [&](const SequenceVictimParams& p) {
                   w.i32(p.tree.depth);
                   w.i32(p.tree.fanout);
                   w.u8(p.tree.original_first ? 1 : 0);
                   w.u64(p.template_seed);
                   w.vector(p.placeholder);
                   w.f64(p.pe_weight);
                   w.mlp(p.projector);
                   w.u8(p.m_global ? 1 : 0);
                   if (p.m_global) w.vector(*p.m_global);
                   w.u8(p.tree_filter ? 1 : 0);
                   if (p.tree_filter) w.f64(*p.tree_filter);
                 },
                 [&](const GnnVictimParams& p) {
                   w.matrix(p.wa);
                   w.vector(p.att_src);
                   w.vector(p.att_dst);
                   w.f64(p.residual);
                   w.u8(p.residual_enabled ? 1 : 0);
                   w.mlp(p.projector);
                   w.u8(p.guard ? 1 : 0);
                   if (p.guard) {
                     w.f64(p.guard->prune_p0);
                     w.f64(p.guard->smoothing_rho);
                   }
                 },
             },
             victim);
  if (!out) throw InputError(fmt::format("failed writing {}", path.string()));
}

VictimParams load_victim(const std::filesystem::path& path, std::optional<std::uint64_t> expected_digest) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
  char magic[4] = {};
  in.read(magic, 4);
  Reader r(in, path.string());
  if (!in || std::memcmp(magic, kMagic, 4) != 0) r.fail("not a victim parameter file");
  const auto version = r.u32();
  if (version != kVictimFormatVersion) r.fail(fmt::format("unsupported format version {}", version));
  const auto kind = r.u8();
  const auto digest = r.u64();
  if (expected_digest && *expected_digest != digest) {
    r.fail(fmt::format("featurizer digest {:016x} does not match the current configuration {:016x}", digest,
                       *expected_digest));
  }
  switch (kind) {
    case 0: {
      SurrogateParams p;
      p.w = r.matrix();
      p.feature_digest = digest;
      return p;
    }
    case 1: {
      SequenceVictimParams p;
      p.tree.depth = r.i32();
      p.tree.fanout = r.i32();
      p.tree.original_first = r.u8() != 0;
      p.template_seed = r.u64();
      p.placeholder = r.vector();
      p.pe_weight = r.f64();
      p.projector = r.mlp();
      if (r.u8()) p.m_global = r.vector();
      if (r.u8()) p.tree_filter = r.f64();
      p.feature_digest = digest;
      return p;
    }
    case 2: {
      GnnVictimParams p;
      p.wa = r.matrix();
      p.att_src = r.vector();
      p.att_dst = r.vector();
      p.residual = r.f64();
      p.residual_enabled = r.u8() != 0;
      p.projector = r.mlp();
      if (r.u8()) {
        GuardSettings g;
        g.prune_p0 = r.f64();
        g.smoothing_rho = r.f64();
        p.guard = g;
      }
      p.feature_digest = digest;
      return p;
    }
    default:
      r.fail(fmt::format("unknown victim kind {}", kind));
  }
}

}  // namespace tagraid
