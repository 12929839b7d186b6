#include "tpsched/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tpsched/errors.hpp"
#include "tpsched/numeric.hpp"

namespace tpsched {

namespace {

constexpr double kLoadEps = 1e-12;

struct LoadStep {
  double progress = 0;
  bool completes = false;
  double offset = 0;  // completion offset within the tick second
};

// Build progress within one tick. Loads start once the in-flight solve has
// finished (offset lat_used). Concurrent loads share the whole window;
// sequential loads consume it one after another in list order.
std::vector<LoadStep> schedule_loads(std::span<const double> remaining, double lat_used,
                                     bool sequential) {
  std::vector<LoadStep> steps(remaining.size());
  const double window = 1.0 - lat_used;
  if (window <= kLoadEps) return steps;
  if (sequential) {
    double cursor = lat_used;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      const double room = 1.0 - cursor;
      if (room <= kLoadEps) break;
      const double use = std::min(remaining[i], room);
      steps[i].progress = use;
      if (use >= remaining[i] - kLoadEps) {
        steps[i].completes = true;
        steps[i].offset = cursor + remaining[i];
      }
      cursor += use;
    }
  } else {
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      steps[i].progress = std::min(remaining[i], window);
      if (remaining[i] <= window + kLoadEps) {
        steps[i].completes = true;
        steps[i].offset = lat_used + remaining[i];
      }
    }
  }
  return steps;
}

}  // namespace

std::string_view to_string(Phase p) { return p == Phase::Stable ? "stable" : "transition"; }

TransitionStats summarize_transitions(std::span<const TransitionRecord> records) {
  TransitionStats stats;
  stats.count = static_cast<int>(records.size());
  if (records.empty()) return stats;
  std::vector<double> durations;
  durations.reserve(records.size());
  for (const auto& r : records) {
    durations.push_back(r.duration());
    stats.max_duration = std::max(stats.max_duration, r.duration());
  }
  std::sort(durations.begin(), durations.end());
  const std::size_t mid = durations.size() / 2;
  stats.median_duration = durations.size() % 2 == 1
                              ? durations[mid]
                              : 0.5 * (durations[mid - 1] + durations[mid]);
  return stats;
}

RuntimeMachine::RuntimeMachine(OverheadModel overheads, SolveFn solver, bool sequential_loads)
    : overheads_(std::move(overheads)), solver_(std::move(solver)),
      sequential_loads_(sequential_loads) {
  if (overheads_.solver_latency < 0)
    throw ValidationError("overheads: solver_latency must be >= 0");
}

void RuntimeMachine::warm_start(std::vector<TaskSpec> specs, ConstraintSet constraints,
                                Assignment assignment, double clock) {
  for (const auto& s : specs) validate(s);
  validate(constraints);
  specs_ = std::move(specs);
  constraints_ = std::move(constraints);
  state_ = RuntimeState{};
  state_.current = std::move(assignment);
  state_.clock = clock;
  solve_.reset();
  transition_start_.reset();
  append_log("warm-start");
}

std::vector<LoadReady> RuntimeMachine::handle_event(const Event& event) {
  if (const auto* change = std::get_if<ConstraintChange>(&event)) return on_constraint_change(*change);
  if (std::get_if<SecondTick>(&event)) return on_tick();
  return on_load_complete(std::get<LoadComplete>(event));
}

std::vector<LoadReady> RuntimeMachine::on_constraint_change(const ConstraintChange& ev) {
  for (const auto& s : ev.tasks) validate(s);
  validate(ev.constraints);
  specs_ = ev.tasks;
  constraints_ = ev.constraints;

  Assignment target = solver_(ev.tasks, ev.constraints, ev.objective, ev.mode);
  solve_ = InFlightSolve{std::move(target), overheads_.solver_latency};

  // A change arriving mid-transition abandons the old target and its loads;
  // the duration is then measured from this (latest) change.
  state_.pending_loads.clear();
  state_.target.reset();
  state_.phase = Phase::Transition;
  transition_start_ = state_.clock;

  append_log("constraint-change start-solve");
  return {};
}

void RuntimeMachine::install_target(Assignment target) {
  std::vector<PendingLoad> pending;
  std::vector<TaskChoice> serving;
  for (const auto& choice : target.choices) {
    const TaskChoice* old = state_.current.find(choice.task_id);
    if (old && old->config.version_id == choice.config.version_id) {
      serving.push_back(choice);  // same engine, new FPS applies immediately
    } else {
      pending.push_back({choice.task_id, choice.config, overheads_.build_time(choice.config), false});
      if (old) serving.push_back(*old);  // keep serving the old engine
    }
  }
  // Shortest build first: that task switches first, and sequential loading
  // drains the queue in the same order.
  std::stable_sort(pending.begin(), pending.end(),
                   [](const PendingLoad& a, const PendingLoad& b) {
                     return a.remaining_build < b.remaining_build;
                   });

  state_.current.choices = std::move(serving);
  state_.current.totals = compute_totals(state_.current.choices);
  state_.target = std::move(target);
  state_.pending_loads = std::move(pending);
}

void RuntimeMachine::enter_stable(double at_clock) {
  if (state_.target) {
    state_.current = *state_.target;
    state_.target.reset();
  }
  state_.pending_loads.clear();
  state_.phase = Phase::Stable;
  if (transition_start_) {
    records_.push_back({*transition_start_, at_clock, transition_loads_});
    transition_start_.reset();
  }
  transition_loads_ = 0;
}

std::vector<LoadReady> RuntimeMachine::on_tick() {
  double lat_used = 0;
  if (solve_) {
    lat_used = std::min(solve_->remaining_latency, 1.0);
    solve_->remaining_latency -= lat_used;
    if (solve_->remaining_latency <= kLoadEps) {
      Assignment target = std::move(solve_->target);
      solve_.reset();
      install_target(std::move(target));
      transition_loads_ = static_cast<int>(state_.pending_loads.size());
      if (state_.pending_loads.empty()) enter_stable(state_.clock + lat_used);
    }
  }

  std::vector<LoadReady> ready;
  if (!state_.pending_loads.empty()) {
    std::vector<double> remaining;
    remaining.reserve(state_.pending_loads.size());
    for (const auto& p : state_.pending_loads) remaining.push_back(p.remaining_build);
    const auto steps = schedule_loads(remaining, lat_used, sequential_loads_);
    for (std::size_t i = 0; i < steps.size(); ++i) {
      auto& load = state_.pending_loads[i];
      load.remaining_build = std::max(0.0, load.remaining_build - steps[i].progress);
      if (steps[i].completes && !load.announced) {
        load.announced = true;
        ready.push_back({load.task_id, state_.clock + steps[i].offset});
      }
    }
    std::stable_sort(ready.begin(), ready.end(), [](const LoadReady& a, const LoadReady& b) {
      return a.completion_clock < b.completion_clock;
    });
  }

  state_.clock += 1.0;
  append_log("tick");
  return ready;
}

std::vector<LoadReady> RuntimeMachine::on_load_complete(const LoadComplete& ev) {
  auto it = std::find_if(state_.pending_loads.begin(), state_.pending_loads.end(),
                         [&](const PendingLoad& p) { return p.task_id == ev.task_id; });
  if (it == state_.pending_loads.end())
    throw ContractViolation("LoadComplete for task with no pending load: " + ev.task_id);
  state_.pending_loads.erase(it);

  // Rebuild the serving set from the target: completed and unchanged tasks on
  // their target configs, still-pending tasks on their old engines.
  if (!state_.target) throw ContractViolation("LoadComplete outside a transition");
  std::vector<TaskChoice> serving;
  for (const auto& choice : state_.target->choices) {
    const bool still_pending =
        std::any_of(state_.pending_loads.begin(), state_.pending_loads.end(),
                    [&](const PendingLoad& p) { return p.task_id == choice.task_id; });
    if (!still_pending) {
      serving.push_back(choice);
    } else if (const TaskChoice* old = state_.current.find(choice.task_id)) {
      serving.push_back(*old);
    }
  }
  state_.current.choices = std::move(serving);
  state_.current.totals = compute_totals(state_.current.choices);

  if (state_.pending_loads.empty() && !solve_) enter_stable(ev.completion_clock);
  append_log("load-complete " + ev.task_id);
  return {};
}

SecondPlan RuntimeMachine::plan_second() const {
  SecondPlan plan;
  const ConstraintSet& c = constraints_;

  for (const auto& ch : state_.current.choices) plan.steady_memory += ch.config.memory;

  if (state_.phase == Phase::Stable) {
    for (const auto& spec : specs_) {
      if (spec.required_fps <= 0) continue;
      PlannedTask row;
      row.task_id = spec.task_id;
      row.demanded = spec.required_fps;
      if (const TaskChoice* ch = state_.current.find(spec.task_id)) {
        row.config = ch->config;
        row.fps = ch->granted_fps;
        plan.time_used += ch->config.time_per_frame * ch->granted_fps;
      }
      plan.tasks.push_back(std::move(row));
    }
    return plan;
  }

  // Transition second. The target is known from the moment of the change;
  // it is only served once the modeled solver latency has elapsed.
  const Assignment& target = solve_ ? solve_->target : *state_.target;
  const double lat_remaining = solve_ ? solve_->remaining_latency : 0.0;
  const double lat_used = std::min(lat_remaining, 1.0);

  struct Pending {
    const TaskChoice* target_choice;
    const TaskChoice* old_choice;  // may be null for newly activated tasks
    double remaining;
  };
  std::vector<Pending> pending;
  if (solve_) {
    for (const auto& choice : target.choices) {
      const TaskChoice* old = state_.current.find(choice.task_id);
      if (old && old->config.version_id == choice.config.version_id) continue;
      pending.push_back({&choice, old, overheads_.build_time(choice.config)});
    }
    std::stable_sort(pending.begin(), pending.end(),
                     [](const Pending& a, const Pending& b) { return a.remaining < b.remaining; });
  } else {
    for (const auto& load : state_.pending_loads) {
      const TaskChoice* tgt = target.find(load.task_id);
      pending.push_back({tgt, state_.current.find(load.task_id), load.remaining_build});
    }
  }

  auto is_pending = [&](std::string_view task) {
    return std::any_of(pending.begin(), pending.end(),
                       [&](const Pending& p) { return p.target_choice->task_id == task; });
  };

  // Tasks that keep their engine get the time they need; the rest of the
  // budget is split equally across the tasks waiting on loads.
  double unchanged_alloc = 0;
  for (const auto& choice : target.choices) {
    if (is_pending(choice.task_id)) continue;
    unchanged_alloc += choice.config.time_per_frame * choice.granted_fps;
  }
  const double share =
      pending.empty() ? 0.0 : (c.time_budget - unchanged_alloc) / static_cast<double>(pending.size());

  std::vector<double> remaining;
  remaining.reserve(pending.size());
  for (const auto& p : pending) remaining.push_back(p.remaining);
  const auto steps = schedule_loads(remaining, lat_used, sequential_loads_);

  const double lat_charge = pending.empty() ? 0.0 : lat_used / static_cast<double>(pending.size());
  if (!pending.empty()) plan.latency_consumed = lat_used;

  for (const auto& spec : specs_) {
    if (spec.required_fps <= 0) continue;
    PlannedTask row;
    row.task_id = spec.task_id;
    row.demanded = spec.required_fps;

    const TaskChoice* tgt = target.find(spec.task_id);
    if (tgt && !is_pending(spec.task_id)) {
      row.config = tgt->config;
      row.fps = tgt->granted_fps;
      plan.time_used += tgt->config.time_per_frame * tgt->granted_fps;
      plan.tasks.push_back(std::move(row));
      continue;
    }
    if (!tgt) {  // demanded but granted nothing by the target
      if (const TaskChoice* old = state_.current.find(spec.task_id)) row.config = old->config;
      plan.tasks.push_back(std::move(row));
      continue;
    }

    std::size_t pi = 0;
    while (pending[pi].target_choice->task_id != spec.task_id) ++pi;
    row.pending = true;
    row.share = share;
    row.charge = lat_charge + steps[pi].progress;
    plan.build_progress += steps[pi].progress;
    // The budget only pays for the share-covered part of the charge; a load
    // whose charge overflows its share keeps progressing in the background
    // buffer without displacing other tasks.
    plan.time_used += std::min(row.charge, row.share);
    if (pending[pi].old_choice) {
      const ConfigProfile& old_cfg = pending[pi].old_choice->config;
      row.config = old_cfg;
      const int no_charge =
          std::min(row.demanded, frames_fitting(row.share, old_cfg.time_per_frame));
      row.fps = std::min(row.demanded, frames_fitting(row.share - row.charge, old_cfg.time_per_frame));
      row.lost_frames = no_charge - row.fps;
      plan.time_used += old_cfg.time_per_frame * row.fps;
    }
    plan.tasks.push_back(std::move(row));
  }

  for (const auto& p : pending) plan.transition_extra_memory += p.target_choice->config.memory;
  return plan;
}

void RuntimeMachine::append_log(std::string_view event_desc) {
  std::ostringstream line;
  line << format_double(state_.clock) << '\t' << to_string(state_.phase) << '\t' << event_desc
       << '\t';
  bool first = true;
  for (const auto& ch : state_.current.choices) {
    if (!first) line << ';';
    first = false;
    line << ch.task_id << "=(" << ch.config.version_id << ',' << ch.granted_fps << ')';
  }
  if (first) line << '-';
  log_.push_back(line.str());
}

}  // namespace tpsched
