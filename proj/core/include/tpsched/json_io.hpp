#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tpsched/optimizer.hpp"
#include "tpsched/profiles.hpp"
#include "tpsched/sim.hpp"

namespace tpsched {

/// One solver problem: tasks, constraints, objective.
struct Instance {
  std::vector<TaskSpec> tasks;
  ConstraintSet constraints;
  Objective objective = Objective::MaxAccuracy;
};

/// Schema: {"tasks":[{"id","fps","acc_th","min_time","priority"}],
///          "constraints":{"time_budget","peak_power","energy_budget","memory_budget"},
///          "objective":"max_accuracy|min_memory|min_energy"}
/// acc_th, min_time and priority default to 0; constraint fields are optional.
Instance parse_instance(std::string_view json);
Instance parse_instance_file(const std::string& path);

/// Trace files reuse the instance schema per iteration plus duration_s and mode.
Trace parse_trace(std::string_view json);
Trace parse_trace_file(const std::string& path);
std::string trace_to_json(const Trace& trace);

/// Solution document: chosen version per task, granted FPS, totals, and the
/// violation diagnosis when degraded. `meta` key/value pairs land under
/// "meta" verbatim.
std::string solution_to_json(const Assignment& assignment, Objective objective,
                             std::span<const std::pair<std::string, std::string>> meta);

/// Generator sidecar: same field names as SynthesisParams, all optional,
/// overlaid onto `base`.
SynthesisParams parse_synthesis_params(std::string_view json, SynthesisParams base);
SynthesisParams parse_synthesis_params_file(const std::string& path, SynthesisParams base);

}  // namespace tpsched
