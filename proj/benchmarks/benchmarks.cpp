#include <benchmark/benchmark.h>

#include "aimaze/complexity.hpp"
#include "aimaze/episode.hpp"
#include "aimaze/harness.hpp"
#include "aimaze/maze.hpp"

namespace {

using namespace aimaze;

void BM_GenerateMaze(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const double factor = size <= 12 ? 0.03 : size <= 18 ? 0.10 : 0.25;
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_maze(size, factor, seed++));
  }
}
BENCHMARK(BM_GenerateMaze)->Arg(12)->Arg(18)->Arg(25)->Arg(30);

void BM_ShortestPath(benchmark::State& state) {
  const MazeGrid grid = generate_maze(25, 0.25, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        shortest_path(grid, grid.starts.front(), grid.exit));
  }
}
BENCHMARK(BM_ShortestPath);

void BM_ComplexityMetrics(benchmark::State& state) {
  const MazeGrid grid = generate_maze(18, 0.10, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_complexity(grid));
  }
}
BENCHMARK(BM_ComplexityMetrics);

void BM_RiskAndModulation(benchmark::State& state) {
  BehaviorWindow window;
  window.total_moves = 120;
  window.total_move_attempts = 130;
  window.dead_end_revisits = 6;
  window.unique_entered = 80;
  for (int i = 0; i < 8; ++i) window.recent.push_back({1, i % 3});
  for (int i = 0; i < 10; ++i) window.path_tail.push_back({1, i % 4});
  FreeEnergyRecord record;
  record.gradient = -0.2;
  for (auto _ : state) {
    const auto risks = risk_components(window);
    const double cost = accuracy_cost(risks);
    record.category = categorize(1.2, cost, {});
    benchmark::DoNotOptimize(modulate_weights(WeightVector{}, record));
  }
}
BENCHMARK(BM_RiskAndModulation);

void BM_EpisodeMedium(benchmark::State& state) {
  const MazeGrid grid = generate_maze(18, 0.10, 5);
  RunConfig config;
  config.configuration = Configuration::FEOnly;
  config.policy = PolicyKind::Heuristic;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    config.seed = seed++;
    benchmark::DoNotOptimize(run_episode(grid, config));
  }
}
BENCHMARK(BM_EpisodeMedium);

void BM_WilsonCi(benchmark::State& state) {
  int successes = 0;
  for (auto _ : state) {
    successes = (successes + 7) % 35;
    benchmark::DoNotOptimize(wilson_ci(successes, 34));
  }
}
BENCHMARK(BM_WilsonCi);

}  // namespace

BENCHMARK_MAIN();
