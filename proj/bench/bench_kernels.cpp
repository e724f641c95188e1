// Serial reference kernels against their OpenMP and Barnes-Hut variants.
// Thread count follows OMP_NUM_THREADS.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "atlas/catalog.hpp"
#include "atlas/kernels.hpp"
#include "atlas/relevance.hpp"

using namespace atlas;
using kernels::Vec2;

namespace {

struct Problem {
  WeightedGraph graph;
  std::vector<Vec2> positions;
  std::vector<std::uint32_t> membership;
};

// Sparse random graph with about 4 edges per node, positions in a square of side sqrt(n).
Problem make_problem(std::size_t n) {
  std::mt19937_64 rng(n);
  std::uniform_int_distribution<std::uint32_t> node(0, static_cast<std::uint32_t>(n - 1));
  std::uniform_real_distribution<double> weight(0.01, 1.0);
  std::uniform_real_distribution<double> coord(0, std::sqrt(static_cast<double>(n)));
  std::vector<WeightedEdge> edges;
  for (std::size_t i = 1; i < n; ++i) edges.push_back({node(rng) % static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i), weight(rng)});
  for (std::size_t k = 0; k < 3 * n; ++k) {
    const auto u = node(rng), v = node(rng);
    if (u != v) edges.push_back({std::min(u, v), std::max(u, v), weight(rng)});
  }
  Problem p{WeightedGraph(n, edges), {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    p.positions.push_back({coord(rng), coord(rng)});
    p.membership.push_back(static_cast<std::uint32_t>(i % 8));
  }
  return p;
}

void BM_forces_serial(benchmark::State& state) {
  const auto p = make_problem(state.range(0));
  std::vector<Vec2> out(p.positions.size());
  for (auto _ : state) {
    kernels::forces_serial(p.graph, p.positions, {}, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_forces_parallel(benchmark::State& state) {
  const auto p = make_problem(state.range(0));
  std::vector<Vec2> out(p.positions.size());
  for (auto _ : state) {
    kernels::forces_parallel(p.graph, p.positions, {}, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_forces_barnes_hut(benchmark::State& state) {
  const auto p = make_problem(state.range(0));
  std::vector<Vec2> out(p.positions.size());
  for (auto _ : state) {
    kernels::forces_barnes_hut(p.graph, p.positions, {}, 0.6, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_energy_serial(benchmark::State& state) {
  const auto p = make_problem(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::energy_serial(p.graph, p.positions, {}));
}

void BM_energy_parallel(benchmark::State& state) {
  const auto p = make_problem(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::energy_parallel(p.graph, p.positions, {}));
}

void BM_modularity_serial(benchmark::State& state) {
  const auto p = make_problem(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::modularity_serial(p.graph, p.membership, 1.0));
}

void BM_modularity_parallel(benchmark::State& state) {
  const auto p = make_problem(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::modularity_parallel(p.graph, p.membership, 1.0));
}

struct ScoringInput {
  std::vector<KeywordId> ids;
  std::vector<HitCounts> counts;
};

ScoringInput make_scoring(std::size_t n) {
  std::mt19937_64 rng(n);
  std::uniform_int_distribution<std::int64_t> hits(1, 2'000'000);
  ScoringInput in;
  for (std::size_t i = 0; i < n; ++i) {
    in.ids.push_back(static_cast<KeywordId>(i));
    const auto k = hits(rng);
    in.counts.push_back({k, std::min(k, hits(rng) / 20), 1'300'000, 250'000'000});
  }
  return in;
}

void BM_scoring_serial(benchmark::State& state) {
  const auto in = make_scoring(state.range(0));
  std::vector<RelevanceScore> out(in.ids.size());
  const auto& fn = find_boost_function("lift");
  for (auto _ : state) {
    score_keywords_serial(in.ids, in.counts, fn, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_scoring_parallel(benchmark::State& state) {
  const auto in = make_scoring(state.range(0));
  std::vector<RelevanceScore> out(in.ids.size());
  const auto& fn = find_boost_function("lift");
  for (auto _ : state) {
    score_keywords_parallel(in.ids, in.counts, fn, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_forces_serial)->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK(BM_forces_parallel)->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK(BM_forces_barnes_hut)->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK(BM_energy_serial)->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK(BM_energy_parallel)->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK(BM_modularity_serial)->RangeMultiplier(8)->Range(512, 262144);
BENCHMARK(BM_modularity_parallel)->RangeMultiplier(8)->Range(512, 262144);
BENCHMARK(BM_scoring_serial)->RangeMultiplier(8)->Range(64, 4096);
BENCHMARK(BM_scoring_parallel)->RangeMultiplier(8)->Range(64, 4096);

BENCHMARK_MAIN();
