#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tpsched/pareto.hpp"
#include "tpsched/profiles.hpp"

namespace tpsched {

inline constexpr int kMaxFps = 30;

/// A task's runtime demands. Lower priority value = higher priority.
struct TaskSpec {
  std::string task_id;
  int required_fps = 0;            // [0, 30]; 0 = inactive
  double accuracy_threshold = 0;   // [0, 1]
  double min_time_alloc = 0;       // seconds per second, [0, 1]
  int priority = 0;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

void validate(const TaskSpec& spec);

/// Global per-second thresholds. The default time budget leaves a 50 ms
/// guard band out of every second.
struct ConstraintSet {
  double time_budget = 0.95;            // seconds per second, (0, 1]
  std::optional<double> peak_power;     // watts
  std::optional<double> energy_budget;  // joules per second
  std::optional<double> memory_budget;  // megabytes

  friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;
};

void validate(const ConstraintSet& c);

enum class Objective { MaxAccuracy, MinMemory, MinEnergy };

std::string_view to_string(Objective o);
std::optional<Objective> parse_objective(std::string_view s);

struct TaskChoice {
  std::string task_id;
  ConfigProfile config;
  int granted_fps = 0;
};

struct Totals {
  double time_used = 0;     // sum t * fps
  double energy = 0;        // sum p * t * fps, joules per second
  double memory = 0;        // sum m over resident configs
  double peak_power = 0;    // max p over serving configs
  double accuracy_sum = 0;  // sum accuracy over serving tasks
};

/// Sums in choice order. Tasks granted 0 FPS keep their model resident
/// (memory counts) but serve nothing (no time/energy/power/accuracy terms).
Totals compute_totals(std::span<const TaskChoice> choices);
double objective_of(const Totals& totals, Objective obj);

/// One configuration plus granted FPS per active task. degraded = false
/// implies granted equals required for every task.
struct Assignment {
  std::vector<TaskChoice> choices;  // in task order
  double objective_value = 0;
  Totals totals;
  bool degraded = false;
  std::vector<std::string> violations;  // diagnosis, set on degraded results

  const TaskChoice* find(std::string_view task_id) const;
};

struct FeasibilityReport {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Evaluates every constraint clause at the FPS recorded in the choices.
/// Per-task clauses apply to tasks serving frames; a granted-0 choice only
/// contributes resident memory. Throws ContractViolation when a task with
/// required_fps > 0 has no choice.
FeasibilityReport check_feasible(std::span<const TaskSpec> tasks,
                                 std::span<const TaskChoice> choices,
                                 const ConstraintSet& c);

/// Non-owning per-task candidate lists; build one from a full pool or from a
/// Pareto front. The source must outlive the view.
class CandidateView {
 public:
  CandidateView(const ProfilePool& pool);      // NOLINT(google-explicit-constructor)
  CandidateView(const ParetoFront& front);     // NOLINT(google-explicit-constructor)

  std::span<const ConfigProfile> for_task(std::string_view task_id) const;
  bool has_task(std::string_view task_id) const;
  /// The task's accuracy-1.0 configuration (present in every pool and front).
  const ConfigProfile& reference_config(std::string_view task_id) const;

 private:
  std::map<std::string, std::span<const ConfigProfile>, std::less<>> spans_;
};

struct SolveOptions {
  /// When set, tasks with required_fps = 0 keep their reference model
  /// resident: its memory is reserved out of the memory budget. Default is
  /// to unload inactive tasks entirely.
  bool keep_inactive_resident = false;
};

/// Exact solve at full required FPS: depth-first branch and bound whose
/// bound is the sum of per-task best objective contributions over the
/// individually threshold-feasible candidates. Returns nullopt when no
/// combination satisfies the constraints (callers then degrade). Ties are
/// broken by higher accuracy sum, then lower time_used, then lexicographic
/// version ids, identically to brute_force_oracle.
std::optional<Assignment> solve_exact(std::span<const TaskSpec> tasks,
                                      const CandidateView& candidates,
                                      const ConstraintSet& c, Objective obj,
                                      const SolveOptions& opts = {});

/// Full enumeration with the same tie-break rule; the verification reference
/// for solve_exact. Guarded against instances over 10^7 combinations.
std::optional<Assignment> brute_force_oracle(std::span<const TaskSpec> tasks,
                                             const CandidateView& candidates,
                                             const ConstraintSet& c, Objective obj,
                                             const SolveOptions& opts = {});

/// Infeasibility fallback: repeatedly drops the FPS of the lowest-priority
/// reducible task by 1 (ties round-robin in task order) and re-solves. A
/// task stops being reducible when its fastest threshold-feasible config
/// could no longer meet the task's min_time_alloc floor at the lower FPS.
/// If every task is blocked and the instance is still infeasible, falls back
/// to heuristic_fair_time. The result always has degraded = true.
Assignment degrade_fps(std::span<const TaskSpec> tasks, const CandidateView& candidates,
                       const ConstraintSet& c, Objective obj,
                       const SolveOptions& opts = {});

/// solve_exact, then degrade_fps when infeasible.
Assignment solve_or_degrade(std::span<const TaskSpec> tasks, const CandidateView& candidates,
                            const ConstraintSet& c, Objective obj,
                            const SolveOptions& opts = {});

/// Comparison heuristics. All run every active task on its accuracy-1.0
/// configuration and honor only the time budget.
Assignment heuristic_fair_fps(std::span<const TaskSpec> tasks, const CandidateView& candidates,
                              const ConstraintSet& c);
Assignment heuristic_fair_time(std::span<const TaskSpec> tasks, const CandidateView& candidates,
                               const ConstraintSet& c);
Assignment heuristic_greedy(std::span<const TaskSpec> tasks, const CandidateView& candidates,
                            const ConstraintSet& c);

}  // namespace tpsched
