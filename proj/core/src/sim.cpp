#include "tpsched/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "tpsched/errors.hpp"
#include "tpsched/numeric.hpp"

namespace tpsched {

namespace {

int total_required(std::span<const TaskSpec> specs) {
  int n = 0;
  for (const auto& s : specs) n += s.required_fps;
  return n;
}

int total_granted(const Assignment& a) {
  int n = 0;
  for (const auto& ch : a.choices) n += ch.granted_fps;
  return n;
}

ConstraintSet time_only(const ConstraintSet& c) {
  ConstraintSet out;
  out.time_budget = c.time_budget;
  return out;
}

struct Accumulator {
  long demanded = 0, processed = 0, granted = 0;
  double weighted_acc_frames = 0;
  double task_acc_sum = 0;
  long task_acc_count = 0;
  double energy = 0;
  double peak_memory = 0, peak_power = 0;
  long overhead = 0;

  void add(const SecondMetrics& m) {
    demanded += m.demanded;
    processed += m.processed;
    granted += m.granted;
    weighted_acc_frames += m.avg_accuracy * m.processed;
    if (m.task_mean_accuracy > 0) {
      task_acc_sum += m.task_mean_accuracy;
      ++task_acc_count;
    }
    energy += m.energy_j;
    peak_memory = std::max(peak_memory, m.memory_mb + m.transition_extra_memory_mb);
    peak_power = std::max(peak_power, m.peak_power_w);
    overhead += m.overhead_frames;
  }

  RunAggregate finish() const {
    RunAggregate agg;
    agg.demanded = demanded;
    agg.processed = processed;
    agg.granted = granted;
    agg.achieved_vs_demanded_pct = demanded > 0 ? 100.0 * processed / demanded : 100.0;
    agg.achieved_vs_granted_pct = granted > 0 ? 100.0 * processed / granted : 100.0;
    agg.frame_weighted_accuracy = processed > 0 ? weighted_acc_frames / processed : 0.0;
    agg.task_mean_accuracy = task_acc_count > 0 ? task_acc_sum / task_acc_count : 0.0;
    agg.total_energy_j = energy;
    agg.peak_memory_mb = peak_memory;
    agg.peak_power_w = peak_power;
    agg.overhead_frames = overhead;
    return agg;
  }
};

SecondMetrics metrics_from_plan(int second, Scheduler sched, const SecondPlan& plan,
                                const Assignment& in_force) {
  SecondMetrics m;
  m.second = second;
  m.scheduler = sched;
  double acc_frames = 0;
  int active = 0;
  double acc_tasks = 0;
  for (const auto& row : plan.tasks) {
    m.demanded += row.demanded;
    m.processed += row.fps;
    m.overhead_frames += row.lost_frames;
    if (row.fps > 0 && row.config) {
      acc_frames += row.config->accuracy * row.fps;
      acc_tasks += row.config->accuracy;
      ++active;
      m.energy_j += row.config->energy_per_frame() * row.fps;
      m.peak_power_w = std::max(m.peak_power_w, row.config->power);
    }
  }
  m.granted = total_granted(in_force);
  m.achieved_fps_pct = m.demanded > 0 ? 100.0 * m.processed / m.demanded : 100.0;
  m.avg_accuracy = m.processed > 0 ? acc_frames / m.processed : 0.0;
  m.task_mean_accuracy = active > 0 ? acc_tasks / active : 0.0;
  m.memory_mb = plan.steady_memory;
  m.transition_extra_memory_mb = plan.transition_extra_memory;
  m.time_used_s = plan.time_used;
  return m;
}

SecondPlan plan_from_assignment(const Assignment& a, std::span<const TaskSpec> specs) {
  SecondPlan plan;
  for (const auto& ch : a.choices) plan.steady_memory += ch.config.memory;
  for (const auto& spec : specs) {
    if (spec.required_fps <= 0) continue;
    PlannedTask row;
    row.task_id = spec.task_id;
    row.demanded = spec.required_fps;
    if (const TaskChoice* ch = a.find(spec.task_id)) {
      row.config = ch->config;
      row.fps = ch->granted_fps;
      plan.time_used += ch->config.time_per_frame * ch->granted_fps;
    }
    plan.tasks.push_back(std::move(row));
  }
  return plan;
}

}  // namespace

void validate_trace(const Trace& trace, const ProfilePool& pool) {
  if (trace.iterations.empty()) throw ValidationError("trace has no iterations");
  for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
    const auto& iter = trace.iterations[i];
    if (iter.duration_s < 1)
      throw ValidationError("trace iteration " + std::to_string(i) + ": duration must be >= 1 s");
    validate(iter.constraints);
    for (std::size_t t = 0; t < iter.tasks.size(); ++t) {
      const TaskSpec& spec = iter.tasks[t];
      validate(spec);
      if (!pool.has_task(spec.task_id))
        throw ValidationError("trace iteration " + std::to_string(i) + ": unknown task id " +
                              spec.task_id);
      for (std::size_t u = t + 1; u < iter.tasks.size(); ++u)
        if (iter.tasks[u].task_id == spec.task_id)
          throw ValidationError("trace iteration " + std::to_string(i) + ": duplicate task id " +
                                spec.task_id);
    }
  }
}

std::string_view to_string(Scheduler s) {
  switch (s) {
    case Scheduler::Transprecision: return "transprecision";
    case Scheduler::FairFps: return "fair-fps";
    case Scheduler::FairTime: return "fair-time";
    case Scheduler::Greedy: return "greedy";
  }
  return "?";
}

std::optional<Scheduler> parse_scheduler(std::string_view s) {
  for (Scheduler sc : kAllSchedulers)
    if (s == to_string(sc)) return sc;
  return std::nullopt;
}

RunResult run(const ProfilePool& pool, const Trace& trace, Scheduler scheduler,
              const OverheadModel& overheads, bool sequential_loads) {
  validate_trace(trace, pool);
  RunResult result;
  result.scheduler = scheduler;
  Accumulator acc;

  if (scheduler == Scheduler::Transprecision) {
    std::map<ParetoMode, ParetoFront> fronts;
    auto front_for = [&](ParetoMode mode) -> const ParetoFront& {
      auto it = fronts.find(mode);
      if (it == fronts.end()) it = fronts.emplace(mode, select_front(pool, mode)).first;
      return it->second;
    };

    Assignment last_solution;
    auto solver = [&](const std::vector<TaskSpec>& tasks, const ConstraintSet& c, Objective obj,
                      ParetoMode mode) {
      CandidateView view(front_for(mode));
      last_solution = solve_or_degrade(tasks, view, c, obj);
      return last_solution;
    };

    RuntimeMachine machine(overheads, solver, sequential_loads);
    int second = 0;
    for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
      const Iteration& iter = trace.iterations[i];
      if (i == 0) {
        solver(iter.tasks, iter.constraints, iter.objective, iter.mode);
        machine.warm_start(iter.tasks, iter.constraints, last_solution, 0.0);
      } else {
        machine.handle_event(ConstraintChange{iter.tasks, iter.constraints, iter.objective, iter.mode});
      }
      result.assignments.push_back(last_solution);

      for (int s = 0; s < iter.duration_s; ++s, ++second) {
        const SecondPlan plan = machine.plan_second();
        SecondMetrics m = metrics_from_plan(second, scheduler, plan, last_solution);
        acc.add(m);
        result.seconds.push_back(m);
        for (const auto& row : plan.tasks) {
          if (!row.pending) continue;
          result.charges.push_back({second, row.task_id, row.share, row.charge,
                                    row.config ? row.config->time_per_frame : 0.0, row.demanded,
                                    row.fps, row.lost_frames});
        }
        auto ready = machine.handle_event(SecondTick{});
        for (const auto& r : ready)
          machine.handle_event(LoadComplete{r.task_id, r.completion_clock});
      }
    }
    result.state_log = machine.log();
    result.transition_records = machine.transitions();
    result.aggregate = acc.finish();
    result.aggregate.transitions = machine.transition_report();
    return result;
  }

  // Non-optimized heuristics: constraints beyond the time budget are
  // ignored, recomputation is instant, and no engine ever reloads.
  CandidateView view(pool);
  int second = 0;
  for (const Iteration& iter : trace.iterations) {
    const ConstraintSet c = time_only(iter.constraints);
    Assignment a;
    switch (scheduler) {
      case Scheduler::FairFps: a = heuristic_fair_fps(iter.tasks, view, c); break;
      case Scheduler::FairTime: a = heuristic_fair_time(iter.tasks, view, c); break;
      default: a = heuristic_greedy(iter.tasks, view, c); break;
    }
    result.assignments.push_back(a);
    for (int s = 0; s < iter.duration_s; ++s, ++second) {
      const SecondPlan plan = plan_from_assignment(a, iter.tasks);
      SecondMetrics m = metrics_from_plan(second, scheduler, plan, a);
      acc.add(m);
      result.seconds.push_back(m);
    }
  }
  result.aggregate = acc.finish();
  return result;
}

std::string metrics_csv(const RunResult& result) {
  std::ostringstream out;
  out << kMetricsCsvHeader << '\n';
  for (const auto& m : result.seconds) {
    out << m.second << ',' << to_string(m.scheduler) << ',' << format_double(m.achieved_fps_pct)
        << ',' << format_double(m.avg_accuracy) << ',' << format_double(m.energy_j) << ','
        << format_double(m.memory_mb) << ',' << format_double(m.peak_power_w) << ','
        << format_double(m.time_used_s) << ',' << m.overhead_frames << '\n';
  }
  return out.str();
}

std::string aggregate_summary(const RunResult& result) {
  const RunAggregate& a = result.aggregate;
  std::ostringstream out;
  out << "scheduler=" << to_string(result.scheduler) << '\n'
      << "seconds=" << result.seconds.size() << '\n'
      << "demanded_frames=" << a.demanded << '\n'
      << "processed_frames=" << a.processed << '\n'
      << "achieved_vs_demanded_pct=" << format_double(a.achieved_vs_demanded_pct) << '\n'
      << "achieved_vs_granted_pct=" << format_double(a.achieved_vs_granted_pct) << '\n'
      << "frame_weighted_accuracy=" << format_double(a.frame_weighted_accuracy) << '\n'
      << "task_mean_accuracy=" << format_double(a.task_mean_accuracy) << '\n'
      << "total_energy_j=" << format_double(a.total_energy_j) << '\n'
      << "peak_memory_mb=" << format_double(a.peak_memory_mb) << '\n'
      << "peak_power_w=" << format_double(a.peak_power_w) << '\n'
      << "overhead_frames=" << a.overhead_frames << '\n'
      << "transitions=" << a.transitions.count << '\n'
      << "transition_median_s=" << format_double(a.transitions.median_duration) << '\n'
      << "transition_max_s=" << format_double(a.transitions.max_duration) << '\n';
  return out.str();
}

std::vector<FpsSweepRow> sweep_fps(const ProfilePool& pool, std::span<const Scheduler> schedulers,
                                   const ConstraintSet& constraints, int max_fps) {
  const ParetoFront time_front = select_front(pool, ParetoMode::Time);
  CandidateView front_view(time_front);
  CandidateView pool_view(pool);

  std::vector<FpsSweepRow> rows;
  for (int fps = 1; fps <= max_fps; ++fps) {
    std::vector<TaskSpec> specs;
    int prio = 1;
    for (const auto& task : pool.task_ids())
      specs.push_back({task, fps, 0.0, 0.0, prio++});

    for (Scheduler sched : schedulers) {
      FpsSweepRow row;
      row.fps = fps;
      row.scheduler = sched;
      switch (sched) {
        case Scheduler::Transprecision:
          row.assignment = solve_or_degrade(specs, front_view, constraints, Objective::MaxAccuracy);
          break;
        case Scheduler::FairFps:
          row.assignment = heuristic_fair_fps(specs, pool_view, time_only(constraints));
          break;
        case Scheduler::FairTime:
          row.assignment = heuristic_fair_time(specs, pool_view, time_only(constraints));
          break;
        case Scheduler::Greedy:
          row.assignment = heuristic_greedy(specs, pool_view, time_only(constraints));
          break;
      }
      const int demanded = total_required(specs);
      const int granted = total_granted(row.assignment);
      row.achieved_fps_pct = demanded > 0 ? 100.0 * granted / demanded : 100.0;
      double acc_frames = 0;
      for (const auto& ch : row.assignment.choices) {
        if (ch.granted_fps > 0) acc_frames += ch.config.accuracy * ch.granted_fps;
        row.per_task_time.emplace_back(ch.task_id, ch.config.time_per_frame * ch.granted_fps);
        row.total_time_s += ch.config.time_per_frame * ch.granted_fps;
      }
      row.avg_accuracy = granted > 0 ? acc_frames / granted : 0.0;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string fps_sweep_csv(const ProfilePool& pool, std::span<const FpsSweepRow> rows) {
  std::ostringstream out;
  out << "fps,scheduler,achieved_fps_pct,avg_accuracy,total_time_s";
  for (const auto& task : pool.task_ids()) out << ",time_" << task << "_s";
  out << '\n';
  for (const auto& row : rows) {
    out << row.fps << ',' << to_string(row.scheduler) << ','
        << format_double(row.achieved_fps_pct) << ',' << format_double(row.avg_accuracy) << ','
        << format_double(row.total_time_s);
    for (const auto& task : pool.task_ids()) {
      double t = 0;
      for (const auto& [id, value] : row.per_task_time)
        if (id == task) t = value;
      out << ',' << format_double(t);
    }
    out << '\n';
  }
  return out.str();
}

std::vector<AccuracySweepRow> sweep_accuracy(const ProfilePool& pool, Objective objective,
                                             std::span<const ParetoMode> modes,
                                             std::span<const double> thresholds, int fps_demand,
                                             const ConstraintSet& constraints) {
  std::map<ParetoMode, ParetoFront> fronts;
  for (ParetoMode m : modes) fronts.emplace(m, select_front(pool, m));

  std::vector<AccuracySweepRow> rows;
  for (double threshold : thresholds) {
    for (ParetoMode mode : modes) {
      std::vector<TaskSpec> specs;
      int prio = 1;
      for (const auto& task : pool.task_ids())
        specs.push_back({task, fps_demand, threshold, 0.0, prio++});
      CandidateView view(fronts.at(mode));

      AccuracySweepRow row;
      row.threshold = threshold;
      row.mode = mode;
      row.assignment = solve_or_degrade(specs, view, constraints, objective);
      int active = 0;
      double acc = 0;
      for (const auto& ch : row.assignment.choices) {
        if (ch.granted_fps > 0) {
          acc += ch.config.accuracy;
          ++active;
        }
      }
      row.avg_accuracy = active > 0 ? acc / active : 0.0;
      row.total_memory_mb = row.assignment.totals.memory;
      row.total_energy_j = row.assignment.totals.energy;
      row.total_time_s = row.assignment.totals.time_used;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string accuracy_sweep_csv(std::span<const AccuracySweepRow> rows) {
  std::ostringstream out;
  out << "threshold,mode,avg_accuracy,total_memory_mb,total_energy_j,total_time_s\n";
  for (const auto& row : rows) {
    out << format_double(row.threshold) << ',' << to_string(row.mode) << ','
        << format_double(row.avg_accuracy) << ',' << format_double(row.total_memory_mb) << ','
        << format_double(row.total_energy_j) << ',' << format_double(row.total_time_s) << '\n';
  }
  return out.str();
}

Trace gen_random_trace(const ProfilePool& pool, std::uint64_t seed, const StressRanges& ranges,
                       Objective objective, ParetoMode mode) {
  if (ranges.iterations < 1 || ranges.duration_s < 1)
    throw ValidationError("stress ranges: iterations and duration must be >= 1");
  Rng rng(seed);

  // Pool-derived scale references for the stressed budgets.
  double memory_ref = 0, energy_ref = 0;
  double power_floor = 0, power_max = 0;
  for (const auto& task : pool.task_ids()) {
    double mem = 0, eng = 0, pmin = 1e300;
    for (const auto& c : pool.configs_for(task)) {
      mem = std::max(mem, c.memory);
      eng = std::max(eng, c.energy_per_frame());
      pmin = std::min(pmin, c.power);
      power_max = std::max(power_max, c.power);
    }
    memory_ref += mem;
    energy_ref += eng * kMaxFps;
    power_floor = std::max(power_floor, pmin);
  }

  Trace trace;
  for (int i = 0; i < ranges.iterations; ++i) {
    Iteration iter;
    iter.duration_s = ranges.duration_s;
    iter.objective = objective;
    iter.mode = mode;
    int prio = 1;
    for (const auto& task : pool.task_ids()) {
      TaskSpec spec;
      spec.task_id = task;
      spec.required_fps =
          static_cast<int>(rng.uniform_int(ranges.fps.first, ranges.fps.second));
      spec.accuracy_threshold =
          rng.uniform(ranges.accuracy_threshold.first, ranges.accuracy_threshold.second);
      spec.priority = prio++;
      iter.tasks.push_back(std::move(spec));
    }
    iter.constraints.time_budget = ranges.time_budget;
    if (ranges.vary_memory)
      iter.constraints.memory_budget =
          memory_ref * rng.uniform(ranges.memory_fraction.first, ranges.memory_fraction.second);
    if (ranges.vary_energy)
      iter.constraints.energy_budget =
          energy_ref * rng.uniform(ranges.energy_fraction.first, ranges.energy_fraction.second);
    if (ranges.vary_power)
      iter.constraints.peak_power =
          power_floor + (power_max - power_floor) *
                            rng.uniform(ranges.power_fraction.first, ranges.power_fraction.second);
    trace.iterations.push_back(std::move(iter));
  }
  return trace;
}

}  // namespace tpsched
