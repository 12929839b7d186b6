#include "tpsched/json_io.hpp"

#include <fstream>
#include <sstream>

#include "tpsched/errors.hpp"
#include "tpsched/numeric.hpp"
#include "tpsched/version.hpp"

#include "json.hpp"

namespace tpsched {

namespace {

using nlohmann::ordered_json;

ordered_json parse_doc(std::string_view source, const char* what) {
  try {
    return ordered_json::parse(source);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double num_or(const ordered_json& obj, const char* key, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_number()) throw ParseError(std::string("field ") + key + " must be a number");
  return it->get<double>();
}

TaskSpec task_from_json(const ordered_json& rec, const std::string& where) {
  if (!rec.is_object() || !rec.contains("id"))
    throw ParseError(where + ": task record needs an \"id\"");
  TaskSpec spec;
  spec.task_id = rec["id"].get<std::string>();
  spec.required_fps = static_cast<int>(num_or(rec, "fps", 0));
  spec.accuracy_threshold = num_or(rec, "acc_th", 0);
  spec.min_time_alloc = num_or(rec, "min_time", 0);
  spec.priority = static_cast<int>(num_or(rec, "priority", 0));
  validate(spec);
  return spec;
}

ConstraintSet constraints_from_json(const ordered_json& obj, const std::string& where) {
  ConstraintSet c;
  if (obj.is_null()) return c;
  if (!obj.is_object()) throw ParseError(where + ": constraints must be an object");
  c.time_budget = num_or(obj, "time_budget", c.time_budget);
  if (obj.contains("peak_power") && !obj["peak_power"].is_null())
    c.peak_power = obj["peak_power"].get<double>();
  if (obj.contains("energy_budget") && !obj["energy_budget"].is_null())
    c.energy_budget = obj["energy_budget"].get<double>();
  if (obj.contains("memory_budget") && !obj["memory_budget"].is_null())
    c.memory_budget = obj["memory_budget"].get<double>();
  validate(c);
  return c;
}

Objective objective_from_json(const ordered_json& obj, const std::string& where) {
  if (!obj.contains("objective")) return Objective::MaxAccuracy;
  const auto name = obj["objective"].get<std::string>();
  auto parsed = parse_objective(name);
  if (!parsed)
    throw ParseError(where + ": unknown objective '" + name +
                     "' (want max_accuracy, min_memory or min_energy)");
  return *parsed;
}

ordered_json constraints_to_json(const ConstraintSet& c) {
  ordered_json obj;
  obj["time_budget"] = c.time_budget;
  if (c.peak_power) obj["peak_power"] = *c.peak_power;
  if (c.energy_budget) obj["energy_budget"] = *c.energy_budget;
  if (c.memory_budget) obj["memory_budget"] = *c.memory_budget;
  return obj;
}

ordered_json tasks_to_json(std::span<const TaskSpec> tasks) {
  ordered_json arr = ordered_json::array();
  for (const auto& t : tasks) {
    ordered_json rec;
    rec["id"] = t.task_id;
    rec["fps"] = t.required_fps;
    rec["acc_th"] = t.accuracy_threshold;
    rec["min_time"] = t.min_time_alloc;
    rec["priority"] = t.priority;
    arr.push_back(std::move(rec));
  }
  return arr;
}

}  // namespace

Instance parse_instance(std::string_view json) {
  const auto doc = parse_doc(json, "instance");
  if (!doc.is_object() || !doc.contains("tasks") || !doc["tasks"].is_array())
    throw ParseError("instance: expected an object with a \"tasks\" array");
  Instance inst;
  for (std::size_t i = 0; i < doc["tasks"].size(); ++i)
    inst.tasks.push_back(task_from_json(doc["tasks"][i], "task " + std::to_string(i)));
  for (std::size_t i = 0; i < inst.tasks.size(); ++i)
    for (std::size_t j = i + 1; j < inst.tasks.size(); ++j)
      if (inst.tasks[i].task_id == inst.tasks[j].task_id)
        throw ParseError("instance: duplicate task id " + inst.tasks[i].task_id);
  inst.constraints = constraints_from_json(doc.value("constraints", ordered_json()), "instance");
  inst.objective = objective_from_json(doc, "instance");
  return inst;
}

Instance parse_instance_file(const std::string& path) { return parse_instance(read_file(path)); }

Trace parse_trace(std::string_view json) {
  const auto doc = parse_doc(json, "trace");
  if (!doc.is_object() || !doc.contains("iterations") || !doc["iterations"].is_array())
    throw ParseError("trace: expected an object with an \"iterations\" array");
  Trace trace;
  for (std::size_t i = 0; i < doc["iterations"].size(); ++i) {
    const auto& rec = doc["iterations"][i];
    const std::string where = "iteration " + std::to_string(i);
    if (!rec.is_object() || !rec.contains("tasks"))
      throw ParseError(where + ": expected an object with a \"tasks\" array");
    Iteration iter;
    iter.duration_s = static_cast<int>(num_or(rec, "duration_s", 5));
    for (std::size_t t = 0; t < rec["tasks"].size(); ++t)
      iter.tasks.push_back(task_from_json(rec["tasks"][t], where));
    iter.constraints = constraints_from_json(rec.value("constraints", ordered_json()), where);
    iter.objective = objective_from_json(rec, where);
    if (rec.contains("mode")) {
      const auto name = rec["mode"].get<std::string>();
      auto parsed = parse_pareto_mode(name);
      if (!parsed)
        throw ParseError(where + ": unknown mode '" + name + "' (want " + pareto_mode_names() + ")");
      iter.mode = *parsed;
    }
    trace.iterations.push_back(std::move(iter));
  }
  return trace;
}

Trace parse_trace_file(const std::string& path) { return parse_trace(read_file(path)); }

std::string trace_to_json(const Trace& trace) {
  ordered_json doc;
  doc["iterations"] = ordered_json::array();
  for (const auto& iter : trace.iterations) {
    ordered_json rec;
    rec["duration_s"] = iter.duration_s;
    rec["tasks"] = tasks_to_json(iter.tasks);
    rec["constraints"] = constraints_to_json(iter.constraints);
    rec["objective"] = std::string(to_string(iter.objective));
    rec["mode"] = std::string(to_string(iter.mode));
    doc["iterations"].push_back(std::move(rec));
  }
  return doc.dump(2) + "\n";
}

std::string solution_to_json(const Assignment& assignment, Objective objective,
                             std::span<const std::pair<std::string, std::string>> meta) {
  ordered_json doc;
  if (!meta.empty()) {
    ordered_json m;
    m["version"] = std::string(kVersion);
    for (const auto& [key, value] : meta) m[key] = value;
    doc["meta"] = std::move(m);
  }
  doc["objective_kind"] = std::string(to_string(objective));
  doc["objective"] = assignment.objective_value;
  doc["degraded"] = assignment.degraded;
  ordered_json chosen = ordered_json::array();
  ordered_json tasks = ordered_json::array();
  for (const auto& ch : assignment.choices) {
    chosen.push_back(ch.config.version_id);
    ordered_json rec;
    rec["id"] = ch.task_id;
    rec["version"] = ch.config.version_id;
    rec["granted_fps"] = ch.granted_fps;
    rec["accuracy"] = ch.config.accuracy;
    rec["time_per_frame_s"] = ch.config.time_per_frame;
    rec["power_w"] = ch.config.power;
    rec["memory_mb"] = ch.config.memory;
    rec["energy_per_frame_j"] = ch.config.energy_per_frame();
    tasks.push_back(std::move(rec));
  }
  doc["chosen"] = std::move(chosen);
  doc["tasks"] = std::move(tasks);
  ordered_json totals;
  totals["time_used_s"] = assignment.totals.time_used;
  totals["energy_j_per_s"] = assignment.totals.energy;
  totals["memory_mb"] = assignment.totals.memory;
  totals["peak_power_w"] = assignment.totals.peak_power;
  totals["accuracy_sum"] = assignment.totals.accuracy_sum;
  doc["totals"] = std::move(totals);
  doc["violations"] = assignment.violations;
  return doc.dump(2) + "\n";
}

SynthesisParams parse_synthesis_params(std::string_view json, SynthesisParams base) {
  const auto doc = parse_doc(json, "synthesis params");
  if (!doc.is_object()) throw ParseError("synthesis params: expected an object");
  SynthesisParams p = base;
  if (doc.contains("seed")) p.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("tasks")) p.tasks = doc["tasks"].get<int>();
  if (doc.contains("versions_per_task")) p.versions_per_task = doc["versions_per_task"].get<int>();
  auto range = [&](const char* key, std::pair<double, double>& out) {
    if (!doc.contains(key)) return;
    const auto& v = doc[key];
    if (!v.is_array() || v.size() != 2)
      throw ParseError(std::string("synthesis params: ") + key + " must be [lo, hi]");
    out = {v[0].get<double>(), v[1].get<double>()};
  };
  range("time_range", p.time_range);
  range("speedup_optimized", p.speedup_optimized);
  range("power_ratio_half", p.power_ratio_half);
  range("build_ratio_half", p.build_ratio_half);
  if (doc.contains("curve_concavity")) p.curve_concavity = doc["curve_concavity"].get<double>();
  if (doc.contains("noise")) p.noise = doc["noise"].get<double>();
  validate(p);
  return p;
}

SynthesisParams parse_synthesis_params_file(const std::string& path, SynthesisParams base) {
  return parse_synthesis_params(read_file(path), base);
}

}  // namespace tpsched
