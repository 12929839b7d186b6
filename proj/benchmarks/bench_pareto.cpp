#include <benchmark/benchmark.h>

#include "tpsched/pareto.hpp"
#include "tpsched/profiles.hpp"

namespace {

using namespace tpsched;

void BM_SelectFront(benchmark::State& state) {
  SynthesisParams p;
  p.tasks = 5;
  p.versions_per_task = static_cast<int>(state.range(0));
  const auto pool = generate_synthetic(p);
  const auto mode = static_cast<ParetoMode>(state.range(1));
  for (auto _ : state) {
    auto front = select_front(pool, mode);
    benchmark::DoNotOptimize(front);
  }
}
BENCHMARK(BM_SelectFront)
    ->Args({20, 0})
    ->Args({200, 0})
    ->Args({20, 1})
    ->Args({200, 1})
    ->Args({200, 4});

void BM_GenerateSynthetic(benchmark::State& state) {
  SynthesisParams p;
  p.tasks = 5;
  p.versions_per_task = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto pool = generate_synthetic(p);
    benchmark::DoNotOptimize(pool);
  }
}
BENCHMARK(BM_GenerateSynthetic)->Arg(20)->Arg(200);

}  // namespace
