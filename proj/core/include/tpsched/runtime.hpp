#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tpsched/optimizer.hpp"
#include "tpsched/pareto.hpp"

namespace tpsched {

/// Time charged for background work. The solver latency default is the
/// midpoint of the 80-180 ms range observed for desk-scale exact solves;
/// engine build charges come from the profile field unless fixed here.
struct OverheadModel {
  enum class BuildTimeSource { ProfileField, Fixed };

  double solver_latency = 0.13;  // seconds, >= 0
  BuildTimeSource build_time_source = BuildTimeSource::ProfileField;
  std::optional<double> fixed_build;  // seconds, used with BuildTimeSource::Fixed

  double build_time(const ConfigProfile& c) const {
    return build_time_source == BuildTimeSource::ProfileField ? c.engine_build_time
                                                              : fixed_build.value_or(0.0);
  }
};

enum class Phase { Stable, Transition };

std::string_view to_string(Phase p);

struct PendingLoad {
  std::string task_id;
  ConfigProfile config;        // the target config being buffered
  double remaining_build = 0;  // seconds
  bool announced = false;      // LoadReady already emitted
};

struct RuntimeState {
  Phase phase = Phase::Stable;
  Assignment current;                 // serving assignment
  std::optional<Assignment> target;   // present in Transition once installed
  std::vector<PendingLoad> pending_loads;
  double clock = 0;  // seconds since start
};

/// Events, totally ordered by clock. A SecondTick at clock T accounts the
/// window [T, T+1). Load completions are announced by the tick and echoed
/// back by the driver as LoadComplete events carrying the completion time.
struct ConstraintChange {
  std::vector<TaskSpec> tasks;
  ConstraintSet constraints;
  Objective objective = Objective::MaxAccuracy;
  ParetoMode mode = ParetoMode::Time;
};
struct SecondTick {};
struct LoadComplete {
  std::string task_id;
  double completion_clock = 0;
};
using Event = std::variant<ConstraintChange, SecondTick, LoadComplete>;

struct LoadReady {
  std::string task_id;
  double completion_clock = 0;
};

/// One task's slice of the next 1-second window.
struct PlannedTask {
  std::string task_id;
  std::optional<ConfigProfile> config;  // absent: no engine loaded yet
  int fps = 0;                          // frames served this second
  int demanded = 0;                     // the spec's required FPS
  bool pending = false;                 // waiting on an engine load
  double share = 0;    // time share handed to a pending task
  double charge = 0;   // solver + build charge deducted from that share
  int lost_frames = 0; // frames the charge cost this task this second
};

struct SecondPlan {
  std::vector<PlannedTask> tasks;
  double latency_consumed = 0;
  double build_progress = 0;
  double time_used = 0;       // sum fps*t + all charges
  double steady_memory = 0;   // resident serving configs
  double transition_extra_memory = 0;  // double-resident pending targets
};

struct TransitionRecord {
  double start_clock = 0;
  double end_clock = 0;
  int loads = 0;

  double duration() const { return end_clock - start_clock; }
};

struct TransitionStats {
  int count = 0;
  double median_duration = 0;
  double max_duration = 0;
};

TransitionStats summarize_transitions(std::span<const TransitionRecord> records);

/// The stable/transition state machine. Background solving and loading are
/// modeled by time accounting: handle_event is atomic, events are processed
/// strictly in order, and identical event sequences yield identical
/// trajectories. The solver callback is invoked synchronously on a
/// ConstraintChange; its result is withheld until solver_latency has been
/// covered by ticks, then installed, with engine loads buffered in the
/// background while the old configuration keeps serving.
class RuntimeMachine {
 public:
  using SolveFn = std::function<Assignment(const std::vector<TaskSpec>&, const ConstraintSet&,
                                           Objective, ParetoMode)>;

  RuntimeMachine(OverheadModel overheads, SolveFn solver, bool sequential_loads = false);

  /// Boot directly into Stable serving `assignment`; no charges.
  void warm_start(std::vector<TaskSpec> specs, ConstraintSet constraints, Assignment assignment,
                  double clock = 0);

  std::vector<LoadReady> handle_event(const Event& event);

  /// Allocation plan for the second starting at the current clock, under the
  /// specs and constraints of the last ConstraintChange. Pure.
  SecondPlan plan_second() const;

  const RuntimeState& state() const { return state_; }
  const std::vector<TaskSpec>& active_specs() const { return specs_; }
  const ConstraintSet& active_constraints() const { return constraints_; }
  bool solve_in_flight() const { return solve_.has_value(); }

  const std::vector<TransitionRecord>& transitions() const { return records_; }
  TransitionStats transition_report() const { return summarize_transitions(records_); }

  /// Tab-separated trajectory: clock, phase, event, per-task (config, fps).
  const std::vector<std::string>& log() const { return log_; }

 private:
  struct InFlightSolve {
    Assignment target;
    double remaining_latency = 0;
  };

  std::vector<LoadReady> on_constraint_change(const ConstraintChange& ev);
  std::vector<LoadReady> on_tick();
  std::vector<LoadReady> on_load_complete(const LoadComplete& ev);
  void install_target(Assignment target);
  void enter_stable(double at_clock);
  void append_log(std::string_view event_desc);

  OverheadModel overheads_;
  SolveFn solver_;
  bool sequential_loads_ = false;

  RuntimeState state_;
  std::optional<InFlightSolve> solve_;
  std::vector<TaskSpec> specs_;
  ConstraintSet constraints_;
  std::optional<double> transition_start_;
  int transition_loads_ = 0;
  std::vector<TransitionRecord> records_;
  std::vector<std::string> log_;
};

}  // namespace tpsched
