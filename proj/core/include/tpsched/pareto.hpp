#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tpsched/profiles.hpp"

namespace tpsched {

/// Cost dimensions of a per-task Pareto selection. Accuracy is always the
/// benefit dimension; energy means energy per frame (FPS is unknown at
/// selection time). A power-only mode would slot in the same way but is out
/// of scope; see README.
enum class ParetoMode { Time, TimeMemory, MemoryOnly, TimeEnergy, EnergyOnly };

inline constexpr ParetoMode kAllParetoModes[] = {
    ParetoMode::Time, ParetoMode::TimeMemory, ParetoMode::MemoryOnly,
    ParetoMode::TimeEnergy, ParetoMode::EnergyOnly};

std::string_view to_string(ParetoMode m);
std::optional<ParetoMode> parse_pareto_mode(std::string_view s);
/// "time, time-memory, memory-only, time-energy, energy-only"
std::string pareto_mode_names();

/// Cost vector of a config under a mode, first dimension first.
std::vector<double> mode_costs(const ConfigProfile& c, ParetoMode m);

/// Weak dominance: a's accuracy >= b's, every mode cost of a <= b's, and at
/// least one comparison strict. Throws ContractViolation across tasks.
bool dominates(const ConfigProfile& a, const ConfigProfile& b, ParetoMode m);

/// Per-task maximal non-dominated subsets, each ordered ascending by the
/// mode's first cost dimension. Among duplicate (accuracy, costs) vectors the
/// lexicographically smallest version_id survives.
class ParetoFront {
 public:
  ParetoFront(ParetoMode mode, std::vector<std::string> task_order,
              std::map<std::string, std::vector<ConfigProfile>, std::less<>> members);

  ParetoMode mode() const { return mode_; }
  const std::vector<std::string>& task_ids() const { return task_order_; }
  std::span<const ConfigProfile> members_for(std::string_view task_id) const;
  std::size_t total_configs() const;

 private:
  ParetoMode mode_;
  std::vector<std::string> task_order_;
  std::map<std::string, std::vector<ConfigProfile>, std::less<>> by_task_;
};

ParetoFront select_front(const ProfilePool& pool, ParetoMode mode);

/// Front CSV: the pool schema plus a trailing `mode` column.
std::string save_front(const ParetoFront& front);

}  // namespace tpsched
