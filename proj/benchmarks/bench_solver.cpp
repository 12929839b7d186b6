#include <benchmark/benchmark.h>

#include "tpsched/optimizer.hpp"
#include "tpsched/pareto.hpp"
#include "tpsched/profiles.hpp"

namespace {

using namespace tpsched;

SynthesisParams sized(int tasks, int versions) {
  SynthesisParams p;
  p.tasks = tasks;
  p.versions_per_task = versions;
  return p;
}

std::vector<TaskSpec> full_demand(const ProfilePool& pool, int fps) {
  std::vector<TaskSpec> specs;
  int prio = 1;
  for (const auto& task : pool.task_ids()) specs.push_back({task, fps, 0.0, 0.0, prio++});
  return specs;
}

void BM_SolveExactOverFront(benchmark::State& state) {
  const auto pool = generate_synthetic(sized(static_cast<int>(state.range(0)),
                                             static_cast<int>(state.range(1))));
  const auto front = select_front(pool, ParetoMode::Time);
  CandidateView view(front);
  const auto specs = full_demand(pool, 15);
  for (auto _ : state) {
    auto result = solve_exact(specs, view, ConstraintSet{}, Objective::MaxAccuracy);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_SolveExactOverFront)->Args({5, 20})->Args({5, 40})->Args({8, 40});

void BM_SolveExactOverFullPool(benchmark::State& state) {
  const auto pool = generate_synthetic(sized(5, static_cast<int>(state.range(0))));
  CandidateView view(pool);
  const auto specs = full_demand(pool, 15);
  for (auto _ : state) {
    auto result = solve_exact(specs, view, ConstraintSet{}, Objective::MaxAccuracy);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_SolveExactOverFullPool)->Arg(20)->Arg(40);

void BM_BruteForceOracle(benchmark::State& state) {
  const auto pool = generate_synthetic(sized(4, static_cast<int>(state.range(0))));
  CandidateView view(pool);
  const auto specs = full_demand(pool, 15);
  for (auto _ : state) {
    auto result = brute_force_oracle(specs, view, ConstraintSet{}, Objective::MaxAccuracy);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_BruteForceOracle)->Arg(8)->Arg(16);

void BM_DegradeFps(benchmark::State& state) {
  const auto pool = generate_synthetic(sized(5, 20));
  const auto front = select_front(pool, ParetoMode::Time);
  CandidateView view(front);
  auto specs = full_demand(pool, 30);
  ConstraintSet tight;
  tight.time_budget = 0.4;
  for (auto _ : state) {
    auto result = degrade_fps(specs, view, tight, Objective::MaxAccuracy);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_DegradeFps);

}  // namespace
