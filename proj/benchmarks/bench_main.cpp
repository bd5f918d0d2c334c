#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "fixtures.hpp"
#include "tagraid/featurize.hpp"
#include "tagraid/levenshtein.hpp"
#include "tagraid/rng.hpp"
#include "tagraid/struct_attack.hpp"
#include "tagraid/synth.hpp"
#include "tagraid/victims.hpp"

using namespace tagraid;

namespace {

std::vector<std::uint32_t> random_symbols(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint32_t> s(n);
  for (auto& c : s) c = static_cast<std::uint32_t>(rng.below(64));
  return s;
}

TextAttributedGraph half_train(TextAttributedGraph g) {
  std::vector<SplitTag> split(g.node_count(), SplitTag::Test);
  for (std::size_t i = 0; i < split.size(); i += 2) split[i] = SplitTag::Train;
  return g.with_split(std::move(split));
}

TrainConfig surrogate_cfg() {
  TrainConfig t;
  t.epochs = 100;
  t.learning_rate = 20.0;
  t.weight_decay = 1e-4;
  return t;
}

void BM_HashEmbed(benchmark::State& state) {
  const auto g = generate_synthetic(cora_like(), 0);
  const FeaturizerConfig cfg;
  NodeId u = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hash_embed(g.text(u), cfg));
    u = (u + 1) % static_cast<NodeId>(g.node_count());
  }
}
BENCHMARK(BM_HashEmbed);

void BM_LevenshteinDp(benchmark::State& state) {
  const auto a = random_symbols(static_cast<std::size_t>(state.range(0)), 1);
  const auto b = random_symbols(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(levenshtein_dp<std::uint32_t>(a, b));
}
BENCHMARK(BM_LevenshteinDp)->Arg(64)->Arg(256)->Arg(1024);

void BM_LevenshteinMyers(benchmark::State& state) {
  const auto a = random_symbols(static_cast<std::size_t>(state.range(0)), 1);
  const auto b = random_symbols(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(levenshtein_myers(a, b));
}
BENCHMARK(BM_LevenshteinMyers)->Arg(64)->Arg(256)->Arg(1024);

void BM_MyersPattern(benchmark::State& state) {
  const auto a = random_symbols(static_cast<std::size_t>(state.range(0)), 1);
  const auto b = random_symbols(static_cast<std::size_t>(state.range(0)), 2);
  const MyersPattern pattern(a);
  for (auto _ : state) benchmark::DoNotOptimize(pattern.distance(b));
}
BENCHMARK(BM_MyersPattern)->Arg(64)->Arg(256)->Arg(1024);

void BM_MetaGradient(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = half_train(testing::random_graph(n, 2 * n, 4, 7));
  const auto x = embed_all(g, FeaturizerConfig{});
  MetattackConfig cfg;
  cfg.unroll_t = 10;
  cfg.inner_lr = 10.0;
  cfg.surrogate = surrogate_cfg();
  const auto problem = make_meta_problem(g, x, cfg);
  const Matrix a = dense_adjacency(g);
  Matrix grad;
  for (auto _ : state) benchmark::DoNotOptimize(meta_gradient(problem, a, &grad));
}
BENCHMARK(BM_MetaGradient)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_NettackTarget(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = half_train(testing::random_graph(n, 2 * n, 4, 7));
  const auto x = embed_all(g, FeaturizerConfig{});
  const auto s = train_surrogate(g, x, surrogate_cfg());
  NodeId target = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nettack_target(g, x, s, target, 5));
    target = (target + 2) % static_cast<NodeId>(n);
  }
}
BENCHMARK(BM_NettackTarget)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
