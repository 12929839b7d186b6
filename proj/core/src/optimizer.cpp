#include "tpsched/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tpsched/errors.hpp"
#include "tpsched/numeric.hpp"

namespace tpsched {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_min(Objective obj) { return obj != Objective::MaxAccuracy; }

double contribution(const ConfigProfile& c, int fps, Objective obj) {
  switch (obj) {
    case Objective::MaxAccuracy: return c.accuracy;
    case Objective::MinMemory: return c.memory;
    case Objective::MinEnergy: return c.energy_per_frame() * fps;
  }
  return 0;
}

struct SolutionKey {
  double objective = 0;
  double accuracy_sum = 0;
  double time_used = 0;
  std::vector<std::string> version_ids;  // in task order
};

SolutionKey key_of(std::span<const TaskChoice> choices, Objective obj) {
  SolutionKey key;
  const Totals totals = compute_totals(choices);
  key.objective = objective_of(totals, obj);
  key.accuracy_sum = totals.accuracy_sum;
  key.time_used = totals.time_used;
  key.version_ids.reserve(choices.size());
  for (const auto& ch : choices) key.version_ids.push_back(ch.config.version_id);
  return key;
}

// Strict "candidate beats incumbent" under the shared tie-break chain:
// objective, then higher accuracy sum, then lower time, then lex version ids.
bool improves(const SolutionKey& cand, const SolutionKey& inc, Objective obj) {
  if (cand.objective != inc.objective)
    return is_min(obj) ? cand.objective < inc.objective : cand.objective > inc.objective;
  if (cand.accuracy_sum != inc.accuracy_sum) return cand.accuracy_sum > inc.accuracy_sum;
  if (cand.time_used != inc.time_used) return cand.time_used < inc.time_used;
  return cand.version_ids < inc.version_ids;
}

Assignment assignment_from(std::vector<TaskChoice> choices, Objective obj) {
  Assignment a;
  a.choices = std::move(choices);
  a.totals = compute_totals(a.choices);
  a.objective_value = objective_of(a.totals, obj);
  return a;
}

// Residual memory budget once inactive tasks' resident models are accounted.
std::optional<double> effective_memory_budget(std::span<const TaskSpec> tasks,
                                              const CandidateView& candidates,
                                              const ConstraintSet& c, const SolveOptions& opts) {
  if (!c.memory_budget || !opts.keep_inactive_resident) return c.memory_budget;
  double resident = 0;
  for (const auto& t : tasks)
    if (t.required_fps == 0 && candidates.has_task(t.task_id))
      resident += candidates.reference_config(t.task_id).memory;
  return *c.memory_budget - resident;
}

}  // namespace

void validate(const TaskSpec& spec) {
  if (spec.task_id.empty()) throw ValidationError("task spec: empty task id");
  if (spec.required_fps < 0 || spec.required_fps > kMaxFps)
    throw ValidationError("task " + spec.task_id + ": required_fps must be in [0, 30]");
  if (spec.accuracy_threshold < 0 || spec.accuracy_threshold > 1)
    throw ValidationError("task " + spec.task_id + ": accuracy_threshold must be in [0, 1]");
  if (spec.min_time_alloc < 0 || spec.min_time_alloc > 1)
    throw ValidationError("task " + spec.task_id + ": min_time_alloc must be in [0, 1]");
}

void validate(const ConstraintSet& c) {
  if (!(c.time_budget > 0) || c.time_budget > 1)
    throw ValidationError("constraints: time_budget must be in (0, 1]");
  auto positive = [](const std::optional<double>& v, const char* name) {
    if (v && !(*v > 0)) throw ValidationError(std::string("constraints: ") + name + " must be > 0");
  };
  positive(c.peak_power, "peak_power");
  positive(c.energy_budget, "energy_budget");
  positive(c.memory_budget, "memory_budget");
}

std::string_view to_string(Objective o) {
  switch (o) {
    case Objective::MaxAccuracy: return "max_accuracy";
    case Objective::MinMemory: return "min_memory";
    case Objective::MinEnergy: return "min_energy";
  }
  return "?";
}

std::optional<Objective> parse_objective(std::string_view s) {
  if (s == "max_accuracy") return Objective::MaxAccuracy;
  if (s == "min_memory") return Objective::MinMemory;
  if (s == "min_energy") return Objective::MinEnergy;
  return std::nullopt;
}

Totals compute_totals(std::span<const TaskChoice> choices) {
  Totals t;
  for (const auto& ch : choices) {
    t.memory += ch.config.memory;
    if (ch.granted_fps <= 0) continue;
    t.time_used += ch.config.time_per_frame * ch.granted_fps;
    t.energy += ch.config.energy_per_frame() * ch.granted_fps;
    t.peak_power = std::max(t.peak_power, ch.config.power);
    t.accuracy_sum += ch.config.accuracy;
  }
  return t;
}

double objective_of(const Totals& totals, Objective obj) {
  switch (obj) {
    case Objective::MaxAccuracy: return totals.accuracy_sum;
    case Objective::MinMemory: return totals.memory;
    case Objective::MinEnergy: return totals.energy;
  }
  return 0;
}

const TaskChoice* Assignment::find(std::string_view task_id) const {
  for (const auto& ch : choices)
    if (ch.task_id == task_id) return &ch;
  return nullptr;
}

FeasibilityReport check_feasible(std::span<const TaskSpec> tasks,
                                 std::span<const TaskChoice> choices,
                                 const ConstraintSet& c) {
  FeasibilityReport report;
  auto fail = [&](std::string msg) {
    report.ok = false;
    report.violations.push_back(std::move(msg));
  };

  double time_used = 0, energy = 0, memory = 0, peak = 0;
  for (const auto& ch : choices) memory += ch.config.memory;

  for (const auto& spec : tasks) {
    if (spec.required_fps <= 0) continue;
    const TaskChoice* ch = nullptr;
    for (const auto& cand : choices)
      if (cand.task_id == spec.task_id) { ch = &cand; break; }
    if (!ch) throw ContractViolation("no choice for active task " + spec.task_id);
    if (ch->granted_fps <= 0) continue;  // degraded to inactive

    const double alloc = ch->config.time_per_frame * ch->granted_fps;
    time_used += alloc;
    energy += ch->config.energy_per_frame() * ch->granted_fps;
    peak = std::max(peak, ch->config.power);

    if (spec.min_time_alloc > 0 && !geq(alloc, spec.min_time_alloc))
      fail("min_time_alloc[" + spec.task_id + "]: " + format_double(alloc) + " below floor " +
           format_double(spec.min_time_alloc));
    if (!geq(ch->config.accuracy, spec.accuracy_threshold))
      fail("accuracy[" + spec.task_id + "]: " + format_double(ch->config.accuracy) +
           " below threshold " + format_double(spec.accuracy_threshold));
  }

  if (!leq(time_used, c.time_budget))
    fail("time: used " + format_double(time_used) + " exceeds budget " + format_double(c.time_budget));
  if (c.peak_power && !leq(peak, *c.peak_power))
    fail("peak_power: " + format_double(peak) + " exceeds limit " + format_double(*c.peak_power));
  if (c.energy_budget && !leq(energy, *c.energy_budget))
    fail("energy: " + format_double(energy) + " exceeds budget " + format_double(*c.energy_budget));
  if (c.memory_budget && !leq(memory, *c.memory_budget))
    fail("memory: " + format_double(memory) + " exceeds budget " + format_double(*c.memory_budget));
  return report;
}

CandidateView::CandidateView(const ProfilePool& pool) {
  for (const auto& task : pool.task_ids()) spans_[task] = pool.configs_for(task);
}

CandidateView::CandidateView(const ParetoFront& front) {
  for (const auto& task : front.task_ids()) spans_[task] = front.members_for(task);
}

std::span<const ConfigProfile> CandidateView::for_task(std::string_view task_id) const {
  auto it = spans_.find(task_id);
  if (it == spans_.end())
    throw ValidationError("no candidate configurations for task " + std::string(task_id));
  return it->second;
}

bool CandidateView::has_task(std::string_view task_id) const {
  return spans_.find(task_id) != spans_.end();
}

const ConfigProfile& CandidateView::reference_config(std::string_view task_id) const {
  const ConfigProfile* best = nullptr;
  for (const auto& c : for_task(task_id)) {
    if (!best || c.accuracy > best->accuracy ||
        (c.accuracy == best->accuracy && c.version_id < best->version_id))
      best = &c;
  }
  return *best;
}

// ---------------------------------------------------------------------------
// Exact solve

namespace {

struct SearchTask {
  const TaskSpec* spec = nullptr;
  std::vector<const ConfigProfile*> cands;  // threshold-feasible, search order
  double best_contrib = 0;                  // bound term
  double min_time = kInf;
  double min_energy = kInf;
  double min_memory = kInf;
};

struct Searcher {
  const ConstraintSet* constraints = nullptr;
  Objective obj = Objective::MaxAccuracy;
  std::optional<double> memory_budget;  // effective
  std::vector<SearchTask> tasks;        // active only, task order
  std::vector<double> suffix_best;
  std::vector<double> suffix_time;
  std::vector<double> suffix_energy;
  std::vector<double> suffix_memory;
  std::vector<const ConfigProfile*> chosen;
  std::optional<SolutionKey> incumbent_key;
  std::vector<const ConfigProfile*> incumbent;

  bool prune_on_bound(double bound) const {
    if (!incumbent_key) return false;
    const double inc = incumbent_key->objective;
    const double slack = 1e-9 * std::max(1.0, std::abs(inc));
    return is_min(obj) ? bound > inc + slack : bound < inc - slack;
  }

  std::vector<TaskChoice> choices_of(const std::vector<const ConfigProfile*>& picks) const {
    std::vector<TaskChoice> choices;
    choices.reserve(picks.size());
    for (std::size_t i = 0; i < picks.size(); ++i)
      choices.push_back({tasks[i].spec->task_id, *picks[i], tasks[i].spec->required_fps});
    return choices;
  }

  void dfs(std::size_t k, double time, double energy, double memory, double obj_partial) {
    if (k == tasks.size()) {
      auto key = key_of(choices_of(chosen), obj);
      if (!incumbent_key || improves(key, *incumbent_key, obj)) {
        incumbent_key = std::move(key);
        incumbent = chosen;
      }
      return;
    }
    const SearchTask& st = tasks[k];
    const int fps = st.spec->required_fps;
    for (const ConfigProfile* c : st.cands) {
      const double nt = time + c->time_per_frame * fps;
      if (!leq(nt + suffix_time[k + 1], constraints->time_budget)) continue;
      double ne = energy;
      if (constraints->energy_budget) {
        ne += c->energy_per_frame() * fps;
        if (!leq(ne + suffix_energy[k + 1], *constraints->energy_budget)) continue;
      }
      double nm = memory;
      if (memory_budget) {
        nm += c->memory;
        if (!leq(nm + suffix_memory[k + 1], *memory_budget)) continue;
      }
      const double partial = obj_partial + contribution(*c, fps, obj);
      if (prune_on_bound(partial + suffix_best[k + 1])) continue;
      chosen.push_back(c);
      dfs(k + 1, nt, ne, nm, partial);
      chosen.pop_back();
    }
  }
};

// Per-task candidate filter shared by the exact search: accuracy threshold,
// per-config power cap, the task's min-time floor at its FPS, and the
// single-task time sanity bound.
std::vector<const ConfigProfile*> feasible_candidates(const TaskSpec& spec,
                                                      std::span<const ConfigProfile> configs,
                                                      const ConstraintSet& c) {
  std::vector<const ConfigProfile*> out;
  for (const auto& cfg : configs) {
    if (!geq(cfg.accuracy, spec.accuracy_threshold)) continue;
    if (c.peak_power && !leq(cfg.power, *c.peak_power)) continue;
    const double alloc = cfg.time_per_frame * spec.required_fps;
    if (spec.min_time_alloc > 0 && !geq(alloc, spec.min_time_alloc)) continue;
    if (!leq(alloc, c.time_budget)) continue;
    out.push_back(&cfg);
  }
  return out;
}

}  // namespace

std::optional<Assignment> solve_exact(std::span<const TaskSpec> tasks,
                                      const CandidateView& candidates,
                                      const ConstraintSet& c, Objective obj,
                                      const SolveOptions& opts) {
  for (const auto& t : tasks) validate(t);
  validate(c);

  Searcher s;
  s.constraints = &c;
  s.obj = obj;
  s.memory_budget = effective_memory_budget(tasks, candidates, c, opts);

  for (const auto& spec : tasks) {
    if (spec.required_fps == 0) continue;
    SearchTask st;
    st.spec = &spec;
    st.cands = feasible_candidates(spec, candidates.for_task(spec.task_id), c);
    if (st.cands.empty()) return std::nullopt;
    for (const ConfigProfile* cfg : st.cands) {
      st.min_time = std::min(st.min_time, cfg->time_per_frame * spec.required_fps);
      st.min_energy = std::min(st.min_energy, cfg->energy_per_frame() * spec.required_fps);
      st.min_memory = std::min(st.min_memory, cfg->memory);
      const double contrib = contribution(*cfg, spec.required_fps, obj);
      if (st.cands.front() == cfg)
        st.best_contrib = contrib;
      else
        st.best_contrib = is_min(obj) ? std::min(st.best_contrib, contrib)
                                      : std::max(st.best_contrib, contrib);
    }
    // Most promising first so the incumbent tightens early.
    std::sort(st.cands.begin(), st.cands.end(),
              [&](const ConfigProfile* a, const ConfigProfile* b) {
                const double ca = contribution(*a, spec.required_fps, obj);
                const double cb = contribution(*b, spec.required_fps, obj);
                if (ca != cb) return is_min(obj) ? ca < cb : ca > cb;
                return a->version_id < b->version_id;
              });
    s.tasks.push_back(std::move(st));
  }

  const std::size_t n = s.tasks.size();
  s.suffix_best.assign(n + 1, 0);
  s.suffix_time.assign(n + 1, 0);
  s.suffix_energy.assign(n + 1, 0);
  s.suffix_memory.assign(n + 1, 0);
  for (std::size_t k = n; k-- > 0;) {
    s.suffix_best[k] = s.suffix_best[k + 1] + s.tasks[k].best_contrib;
    s.suffix_time[k] = s.suffix_time[k + 1] + s.tasks[k].min_time;
    s.suffix_energy[k] = s.suffix_energy[k + 1] + s.tasks[k].min_energy;
    s.suffix_memory[k] = s.suffix_memory[k + 1] + s.tasks[k].min_memory;
  }

  s.dfs(0, 0, 0, 0, 0);
  if (n > 0 && !s.incumbent_key) return std::nullopt;

  return assignment_from(s.choices_of(s.incumbent), obj);
}

std::optional<Assignment> brute_force_oracle(std::span<const TaskSpec> tasks,
                                             const CandidateView& candidates,
                                             const ConstraintSet& c, Objective obj,
                                             const SolveOptions& opts) {
  for (const auto& t : tasks) validate(t);
  validate(c);

  std::vector<const TaskSpec*> active;
  for (const auto& spec : tasks)
    if (spec.required_fps > 0) active.push_back(&spec);

  double combinations = 1;
  for (const TaskSpec* spec : active)
    combinations *= static_cast<double>(candidates.for_task(spec->task_id).size());
  if (combinations > 1e7)
    throw ContractViolation("oracle instance too large: " + format_double(combinations) +
                            " combinations");

  ConstraintSet effective = c;
  effective.memory_budget = effective_memory_budget(tasks, candidates, c, opts);

  std::optional<SolutionKey> best_key;
  std::vector<TaskChoice> best_choices;

  std::vector<std::size_t> idx(active.size(), 0);
  while (true) {
    std::vector<TaskChoice> choices;
    choices.reserve(active.size());
    for (std::size_t i = 0; i < active.size(); ++i) {
      auto span = candidates.for_task(active[i]->task_id);
      choices.push_back({active[i]->task_id, span[idx[i]], active[i]->required_fps});
    }
    if (check_feasible(tasks, choices, effective).ok) {
      auto key = key_of(choices, obj);
      if (!best_key || improves(key, *best_key, obj)) {
        best_key = std::move(key);
        best_choices = std::move(choices);
      }
    }
    // odometer
    std::size_t i = 0;
    for (; i < idx.size(); ++i) {
      if (++idx[i] < candidates.for_task(active[i]->task_id).size()) break;
      idx[i] = 0;
    }
    if (i == idx.size()) break;
  }

  if (!active.empty() && !best_key) return std::nullopt;
  return assignment_from(std::move(best_choices), obj);
}

namespace {

// Diagnosis attached to degraded results: what failed at full demand with
// every task on its reference model.
std::vector<std::string> diagnose_full_demand(std::span<const TaskSpec> tasks,
                                              const CandidateView& candidates,
                                              const ConstraintSet& c) {
  std::vector<TaskChoice> choices;
  for (const auto& spec : tasks) {
    if (spec.required_fps == 0) continue;
    choices.push_back({spec.task_id, candidates.reference_config(spec.task_id), spec.required_fps});
  }
  return check_feasible(tasks, choices, c).violations;
}

}  // namespace

Assignment degrade_fps(std::span<const TaskSpec> tasks, const CandidateView& candidates,
                       const ConstraintSet& c, Objective obj, const SolveOptions& opts) {
  const std::size_t n = tasks.size();
  std::vector<int> fps(n);
  std::vector<double> fastest(n, kInf);  // fastest threshold-feasible time per frame
  int total_fps = 0;
  for (std::size_t i = 0; i < n; ++i) {
    fps[i] = tasks[i].required_fps;
    total_fps += fps[i];
    for (const auto& cfg : candidates.for_task(tasks[i].task_id)) {
      if (!geq(cfg.accuracy, tasks[i].accuracy_threshold)) continue;
      if (c.peak_power && !leq(cfg.power, *c.peak_power)) continue;
      fastest[i] = std::min(fastest[i], cfg.time_per_frame);
    }
  }

  const auto diagnosis = diagnose_full_demand(tasks, candidates, c);
  std::size_t rr_cursor = 0;

  for (int iter = 0; iter <= total_fps; ++iter) {
    std::vector<TaskSpec> reduced(tasks.begin(), tasks.end());
    for (std::size_t i = 0; i < n; ++i) reduced[i].required_fps = fps[i];
    if (auto solved = solve_exact(reduced, candidates, c, obj, opts)) {
      solved->degraded = true;
      solved->violations = diagnosis;
      return *solved;
    }

    // Reducible: still serving, and dropping one frame would not push the
    // fastest capable config under the task's min-time floor.
    std::vector<std::size_t> reducible;
    for (std::size_t i = 0; i < n; ++i) {
      if (fps[i] <= 0) continue;
      if (tasks[i].min_time_alloc > 0 && std::isfinite(fastest[i]) &&
          !geq(fastest[i] * (fps[i] - 1), tasks[i].min_time_alloc))
        continue;
      reducible.push_back(i);
    }
    if (reducible.empty()) break;

    int lowest = tasks[reducible.front()].priority;
    for (std::size_t i : reducible) lowest = std::max(lowest, tasks[i].priority);
    std::size_t pick = reducible.front();
    std::size_t pick_rank = n;
    for (std::size_t i : reducible) {
      if (tasks[i].priority != lowest) continue;
      const std::size_t rank = (i + n - rr_cursor % n) % n;
      if (rank < pick_rank) {
        pick_rank = rank;
        pick = i;
      }
    }
    --fps[pick];
    rr_cursor = pick + 1;
  }

  // Every task blocked (min-time floors) and still infeasible.
  Assignment fallback = heuristic_fair_time(tasks, candidates, c);
  fallback.degraded = true;
  fallback.violations = diagnosis;
  return fallback;
}

Assignment solve_or_degrade(std::span<const TaskSpec> tasks, const CandidateView& candidates,
                            const ConstraintSet& c, Objective obj, const SolveOptions& opts) {
  if (auto solved = solve_exact(tasks, candidates, c, obj, opts)) return *solved;
  return degrade_fps(tasks, candidates, c, obj, opts);
}

// ---------------------------------------------------------------------------
// Heuristics

namespace {

std::vector<const TaskSpec*> active_tasks(std::span<const TaskSpec> tasks) {
  std::vector<const TaskSpec*> out;
  for (const auto& t : tasks)
    if (t.required_fps > 0) out.push_back(&t);
  return out;
}

Assignment finish_heuristic(std::vector<TaskChoice> choices, std::span<const TaskSpec> tasks) {
  Assignment a = assignment_from(std::move(choices), Objective::MaxAccuracy);
  for (const auto& ch : a.choices) {
    for (const auto& spec : tasks) {
      if (spec.task_id == ch.task_id && ch.granted_fps < spec.required_fps) a.degraded = true;
    }
  }
  return a;
}

}  // namespace

Assignment heuristic_fair_fps(std::span<const TaskSpec> tasks, const CandidateView& candidates,
                              const ConstraintSet& c) {
  auto active = active_tasks(tasks);
  int common = 0;
  for (int f = kMaxFps; f >= 0; --f) {
    double used = 0;
    for (const TaskSpec* spec : active)
      used += candidates.reference_config(spec->task_id).time_per_frame *
              std::min(f, spec->required_fps);
    if (leq(used, c.time_budget)) {
      common = f;
      break;
    }
  }
  std::vector<TaskChoice> choices;
  for (const TaskSpec* spec : active)
    choices.push_back({spec->task_id, candidates.reference_config(spec->task_id),
                       std::min(common, spec->required_fps)});
  return finish_heuristic(std::move(choices), tasks);
}

Assignment heuristic_fair_time(std::span<const TaskSpec> tasks, const CandidateView& candidates,
                               const ConstraintSet& c) {
  auto active = active_tasks(tasks);
  std::vector<TaskChoice> choices;
  if (!active.empty()) {
    const double slot = c.time_budget / static_cast<double>(active.size());
    for (const TaskSpec* spec : active) {
      const auto& ref = candidates.reference_config(spec->task_id);
      const int fit = frames_fitting(slot, ref.time_per_frame);
      choices.push_back({spec->task_id, ref, std::min(fit, spec->required_fps)});
    }
  }
  return finish_heuristic(std::move(choices), tasks);
}

Assignment heuristic_greedy(std::span<const TaskSpec> tasks, const CandidateView& candidates,
                            const ConstraintSet& c) {
  auto active = active_tasks(tasks);
  std::stable_sort(active.begin(), active.end(),
                   [](const TaskSpec* a, const TaskSpec* b) { return a->priority < b->priority; });
  double remaining = c.time_budget;
  std::map<std::string, TaskChoice, std::less<>> by_task;
  for (const TaskSpec* spec : active) {
    const auto& ref = candidates.reference_config(spec->task_id);
    const double needed = ref.time_per_frame * spec->required_fps;
    const double received = std::min(needed, remaining);
    remaining -= received;
    const int fit = frames_fitting(received, ref.time_per_frame);
    by_task.emplace(spec->task_id,
                    TaskChoice{spec->task_id, ref, std::min(fit, spec->required_fps)});
  }
  // Emit in task order, not priority order.
  std::vector<TaskChoice> choices;
  for (const auto& spec : tasks) {
    auto it = by_task.find(spec.task_id);
    if (it != by_task.end()) choices.push_back(std::move(it->second));
  }
  return finish_heuristic(std::move(choices), tasks);
}

}  // namespace tpsched
