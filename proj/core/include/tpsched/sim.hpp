#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tpsched/optimizer.hpp"
#include "tpsched/pareto.hpp"
#include "tpsched/profiles.hpp"
#include "tpsched/runtime.hpp"

namespace tpsched {

struct Iteration {
  int duration_s = 5;
  std::vector<TaskSpec> tasks;
  ConstraintSet constraints;
  Objective objective = Objective::MaxAccuracy;
  ParetoMode mode = ParetoMode::Time;
};

struct Trace {
  std::vector<Iteration> iterations;
};

void validate_trace(const Trace& trace, const ProfilePool& pool);

enum class Scheduler { Transprecision, FairFps, FairTime, Greedy };

inline constexpr Scheduler kAllSchedulers[] = {Scheduler::Transprecision, Scheduler::FairFps,
                                               Scheduler::FairTime, Scheduler::Greedy};

std::string_view to_string(Scheduler s);
std::optional<Scheduler> parse_scheduler(std::string_view s);

/// One simulated second. avg_accuracy weights each serving config by the
/// frames it processed; task_mean_accuracy is the unweighted per-task mean.
struct SecondMetrics {
  int second = 0;
  Scheduler scheduler = Scheduler::Transprecision;
  double achieved_fps_pct = 0;  // processed vs demanded
  double avg_accuracy = 0;
  double energy_j = 0;
  double memory_mb = 0;  // resident serving configs
  double peak_power_w = 0;
  double time_used_s = 0;
  int overhead_frames = 0;

  int demanded = 0;
  int processed = 0;
  int granted = 0;  // what the solution in force promised this second
  double task_mean_accuracy = 0;
  double transition_extra_memory_mb = 0;  // double-resident pending loads
};

/// Per pending-load task and second: the share it was handed, the charge
/// deducted, and the frames that cost. Enough to re-derive overhead frames
/// analytically.
struct ChargeRecord {
  int second = 0;
  std::string task_id;
  double share = 0;
  double charge = 0;
  double time_per_frame = 0;  // old engine; 0 when none was loaded yet
  int required = 0;
  int granted = 0;
  int lost_frames = 0;
};

struct RunAggregate {
  long demanded = 0;
  long processed = 0;
  long granted = 0;
  double achieved_vs_demanded_pct = 0;
  double achieved_vs_granted_pct = 0;
  double frame_weighted_accuracy = 0;
  double task_mean_accuracy = 0;
  double total_energy_j = 0;
  double peak_memory_mb = 0;  // including transition double-residency
  double peak_power_w = 0;
  long overhead_frames = 0;
  TransitionStats transitions;
};

struct RunResult {
  Scheduler scheduler = Scheduler::Transprecision;
  std::vector<SecondMetrics> seconds;
  std::vector<ChargeRecord> charges;
  std::vector<Assignment> assignments;  // the solution installed per iteration
  std::vector<std::string> state_log;
  std::vector<TransitionRecord> transition_records;
  RunAggregate aggregate;
};

/// Drives a trace second by second. The first iteration boots the system
/// warm (its engines are in place before measurement starts); every later
/// iteration raises a ConstraintChange with full solver and engine-load
/// charges. Heuristic schedulers ignore all constraints but the time budget
/// and switch instantly. Deterministic for fixed inputs.
RunResult run(const ProfilePool& pool, const Trace& trace, Scheduler scheduler,
              const OverheadModel& overheads, bool sequential_loads = false);

inline constexpr std::string_view kMetricsCsvHeader =
    "second,scheduler,achieved_fps_pct,avg_accuracy,energy_j,memory_mb,peak_power_w,"
    "time_used_s,overhead_frames";

std::string metrics_csv(const RunResult& result);
std::string aggregate_summary(const RunResult& result);

struct FpsSweepRow {
  int fps = 0;
  Scheduler scheduler = Scheduler::Transprecision;
  Assignment assignment;
  double achieved_fps_pct = 0;
  double avg_accuracy = 0;  // frame-weighted
  double total_time_s = 0;
  std::vector<std::pair<std::string, double>> per_task_time;
};

/// Steady-state demand sweep: every task asks for the same FPS, 1..max_fps.
std::vector<FpsSweepRow> sweep_fps(const ProfilePool& pool,
                                   std::span<const Scheduler> schedulers,
                                   const ConstraintSet& constraints, int max_fps = kMaxFps);
std::string fps_sweep_csv(const ProfilePool& pool, std::span<const FpsSweepRow> rows);

struct AccuracySweepRow {
  double threshold = 0;
  ParetoMode mode = ParetoMode::Time;
  Assignment assignment;
  double avg_accuracy = 0;  // unweighted per-task mean
  double total_memory_mb = 0;
  double total_energy_j = 0;
  double total_time_s = 0;
};

/// Minimum-accuracy sweep under a minimizing objective, one solve per
/// (threshold, selection mode).
std::vector<AccuracySweepRow> sweep_accuracy(const ProfilePool& pool, Objective objective,
                                             std::span<const ParetoMode> modes,
                                             std::span<const double> thresholds, int fps_demand,
                                             const ConstraintSet& constraints);
std::string accuracy_sweep_csv(std::span<const AccuracySweepRow> rows);

/// Stress workload knobs. Budget fractions scale references computed from
/// the pool: total memory of every task's largest config, and the maximal
/// per-second energy envelope at 30 FPS.
struct StressRanges {
  int iterations = 100;
  int duration_s = 5;
  std::pair<int, int> fps = {1, 30};
  std::pair<double, double> accuracy_threshold = {0.7, 1.0};
  std::pair<double, double> memory_fraction = {0.4, 0.9};
  std::pair<double, double> energy_fraction = {0.4, 0.9};
  std::pair<double, double> power_fraction = {0.0, 1.0};  // floor..pool-max interpolation
  double time_budget = 0.95;
  bool vary_memory = true;
  bool vary_energy = true;
  bool vary_power = true;
};

/// Seeded random trace; parameters are redrawn every iteration.
Trace gen_random_trace(const ProfilePool& pool, std::uint64_t seed, const StressRanges& ranges,
                       Objective objective, ParetoMode mode);

}  // namespace tpsched
