#include "tpsched/pareto.hpp"

#include <algorithm>
#include <sstream>

#include "tpsched/errors.hpp"
#include "tpsched/numeric.hpp"

namespace tpsched {

std::string_view to_string(ParetoMode m) {
  switch (m) {
    case ParetoMode::Time: return "time";
    case ParetoMode::TimeMemory: return "time-memory";
    case ParetoMode::MemoryOnly: return "memory-only";
    case ParetoMode::TimeEnergy: return "time-energy";
    case ParetoMode::EnergyOnly: return "energy-only";
  }
  return "?";
}

std::optional<ParetoMode> parse_pareto_mode(std::string_view s) {
  for (ParetoMode m : kAllParetoModes)
    if (s == to_string(m)) return m;
  return std::nullopt;
}

std::string pareto_mode_names() {
  std::string names;
  for (ParetoMode m : kAllParetoModes) {
    if (!names.empty()) names += ", ";
    names += to_string(m);
  }
  return names;
}

std::vector<double> mode_costs(const ConfigProfile& c, ParetoMode m) {
  switch (m) {
    case ParetoMode::Time: return {c.time_per_frame};
    case ParetoMode::TimeMemory: return {c.time_per_frame, c.memory};
    case ParetoMode::MemoryOnly: return {c.memory};
    case ParetoMode::TimeEnergy: return {c.time_per_frame, c.energy_per_frame()};
    case ParetoMode::EnergyOnly: return {c.energy_per_frame()};
  }
  return {};
}

namespace {

struct CostPair {
  double c0 = 0, c1 = 0;
  int dims = 1;
};

CostPair costs_of(const ConfigProfile& c, ParetoMode m) {
  switch (m) {
    case ParetoMode::Time: return {c.time_per_frame, 0, 1};
    case ParetoMode::TimeMemory: return {c.time_per_frame, c.memory, 2};
    case ParetoMode::MemoryOnly: return {c.memory, 0, 1};
    case ParetoMode::TimeEnergy: return {c.time_per_frame, c.energy_per_frame(), 2};
    case ParetoMode::EnergyOnly: return {c.energy_per_frame(), 0, 1};
  }
  return {};
}

}  // namespace

bool dominates(const ConfigProfile& a, const ConfigProfile& b, ParetoMode m) {
  if (a.task_id != b.task_id)
    throw ContractViolation("dominates() across tasks: " + a.task_id + " vs " + b.task_id);
  if (a.accuracy < b.accuracy) return false;
  bool strict = a.accuracy > b.accuracy;
  const CostPair ca = costs_of(a, m);
  const CostPair cb = costs_of(b, m);
  if (ca.c0 > cb.c0) return false;
  if (ca.c0 < cb.c0) strict = true;
  if (ca.dims == 2) {
    if (ca.c1 > cb.c1) return false;
    if (ca.c1 < cb.c1) strict = true;
  }
  return strict;
}

ParetoFront::ParetoFront(ParetoMode mode, std::vector<std::string> task_order,
                         std::map<std::string, std::vector<ConfigProfile>, std::less<>> members)
    : mode_(mode), task_order_(std::move(task_order)), by_task_(std::move(members)) {}

std::span<const ConfigProfile> ParetoFront::members_for(std::string_view task_id) const {
  auto it = by_task_.find(task_id);
  if (it == by_task_.end())
    throw ValidationError("front has no task: " + std::string(task_id));
  return it->second;
}

std::size_t ParetoFront::total_configs() const {
  std::size_t n = 0;
  for (const auto& [task, members] : by_task_) n += members.size();
  return n;
}

namespace {

struct Keyed {
  const ConfigProfile* config;
  std::vector<double> costs;
};

bool same_vector(const Keyed& a, const Keyed& b) {
  return a.config->accuracy == b.config->accuracy && a.costs == b.costs;
}

bool keyed_dominates(const Keyed& a, const Keyed& b) {
  if (a.config->accuracy < b.config->accuracy) return false;
  bool strict = a.config->accuracy > b.config->accuracy;
  for (std::size_t i = 0; i < a.costs.size(); ++i) {
    if (a.costs[i] > b.costs[i]) return false;
    if (a.costs[i] < b.costs[i]) strict = true;
  }
  return strict;
}

// Sorted so that any dominator of x precedes x, and the survivor of a
// duplicate-vector group (smallest version_id) comes first.
bool scan_order(const Keyed& a, const Keyed& b) {
  if (a.costs != b.costs) return a.costs < b.costs;
  if (a.config->accuracy != b.config->accuracy) return a.config->accuracy > b.config->accuracy;
  return a.config->version_id < b.config->version_id;
}

std::vector<ConfigProfile> front_of_task(std::span<const ConfigProfile> configs, ParetoMode mode) {
  std::vector<Keyed> keyed;
  keyed.reserve(configs.size());
  for (const auto& c : configs) keyed.push_back({&c, mode_costs(c, mode)});
  std::sort(keyed.begin(), keyed.end(), scan_order);

  // One forward pass: each candidate is tested against kept members only.
  // Dominance is transitive, so a point dominated by anything is dominated
  // by a kept member, which the sort guarantees was seen earlier.
  std::vector<Keyed> kept;
  for (const auto& cand : keyed) {
    bool drop = false;
    for (const auto& m : kept) {
      if (same_vector(m, cand) || keyed_dominates(m, cand)) {
        drop = true;
        break;
      }
    }
    if (!drop) kept.push_back(cand);
  }

  std::vector<ConfigProfile> members;
  members.reserve(kept.size());
  for (const auto& k : kept) members.push_back(*k.config);
  return members;  // scan_order already ascends by first cost
}

}  // namespace

ParetoFront select_front(const ProfilePool& pool, ParetoMode mode) {
  std::map<std::string, std::vector<ConfigProfile>, std::less<>> members;
  for (const auto& task : pool.task_ids())
    members[task] = front_of_task(pool.configs_for(task), mode);
  return ParetoFront(mode, pool.task_ids(), std::move(members));
}

std::string save_front(const ParetoFront& front) {
  std::ostringstream out;
  out << kPoolCsvHeader << ",mode\n";
  for (const auto& task : front.task_ids()) {
    for (const auto& c : front.members_for(task)) {
      out << c.task_id << ',' << c.version_id << ',' << to_string(c.precision) << ','
          << to_string(c.backend) << ',' << format_double(c.time_per_frame) << ','
          << format_double(c.accuracy) << ',' << format_double(c.power) << ','
          << format_double(c.memory) << ',' << format_double(c.engine_build_time) << ','
          << format_double(c.engine_size) << ',' << to_string(front.mode()) << '\n';
    }
  }
  return out.str();
}

}  // namespace tpsched
