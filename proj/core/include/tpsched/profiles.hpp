#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tpsched {

enum class Precision { Single, Half };
enum class Backend { Standard, Optimized };

std::string_view to_string(Precision p);
std::string_view to_string(Backend b);

/// One profiled implementation of one task. Accuracy is relative to the
/// task's best model, so exactly one configuration per task carries 1.0.
/// Energy is never stored; it is always the product power * time_per_frame.
struct ConfigProfile {
  std::string task_id;
  std::string version_id;
  Precision precision = Precision::Single;
  Backend backend = Backend::Standard;
  double time_per_frame = 0;   // seconds, > 0
  double accuracy = 0;         // (0, 1], relative
  double power = 0;            // watts, > 0
  double memory = 0;           // megabytes, > 0
  double engine_build_time = 0;  // seconds, >= 0
  double engine_size = 0;        // megabytes, >= 0

  double energy_per_frame() const { return power * time_per_frame; }

  friend bool operator==(const ConfigProfile&, const ConfigProfile&) = default;
};

/// Validated set of configurations grouped by task. Immutable once built;
/// safe to share read-only across threads.
class ProfilePool {
 public:
  /// Validates every ConfigProfile invariant, (task, version) uniqueness and
  /// the one-reference-per-task rule. Throws ValidationError naming the
  /// offending (task_id, version_id).
  static ProfilePool from_configs(std::vector<ConfigProfile> configs);

  /// Tasks in first-appearance order of the source.
  const std::vector<std::string>& task_ids() const { return task_order_; }

  std::span<const ConfigProfile> configs_for(std::string_view task_id) const;

  /// The task's accuracy-1.0 configuration.
  const ConfigProfile& reference_config(std::string_view task_id) const;

  const ConfigProfile* find(std::string_view task_id, std::string_view version_id) const;

  std::size_t total_configs() const;
  bool has_task(std::string_view task_id) const;

 private:
  ProfilePool() = default;
  std::vector<std::string> task_order_;
  std::map<std::string, std::vector<ConfigProfile>, std::less<>> by_task_;
};

/// Knobs of the synthetic pool generator. The range defaults model an
/// optimized inference backend speeding execution up 2.6-10.9x and
/// half-precision variants drawing 0.4-0.8x the power with 0.3-0.5x the
/// engine-build cost, typical of small edge GPUs.
struct SynthesisParams {
  std::uint64_t seed = 7;
  int tasks = 5;
  int versions_per_task = 20;
  std::pair<double, double> time_range = {0.02, 0.10};         // base seconds/frame
  std::pair<double, double> speedup_optimized = {2.6, 10.9};   // backend speedup
  std::pair<double, double> power_ratio_half = {0.4, 0.8};
  std::pair<double, double> build_ratio_half = {0.3, 0.5};
  double curve_concavity = 12.0;  // accuracy(t) = (t/t_ref)^(1/concavity)
  double noise = 0.05;            // multiplicative, in [0, 0.5)
};

/// Validates params; throws ValidationError on degenerate ranges or counts.
void validate(const SynthesisParams& params);

/// Deterministic for a fixed seed. Per task: accuracy falls concavely as
/// time_per_frame falls, memory and power track time but are perturbed
/// independently, and exactly one configuration has accuracy 1.0.
ProfilePool generate_synthetic(const SynthesisParams& params);

/// Parses a pool from CSV (documented header) or a JSON mirror; JSON is
/// assumed when the first non-whitespace byte is '{' or '['. Lines starting
/// with '#' in CSV are comments. Throws ParseError / ValidationError.
ProfilePool load_pool(std::string_view source);
ProfilePool load_pool_file(const std::string& path);

/// CSV with the documented header, rows in pool task order.
void save_pool(const ProfilePool& pool, std::ostream& out);
std::string save_pool(const ProfilePool& pool);

inline constexpr std::string_view kPoolCsvHeader =
    "task_id,version_id,precision,backend,time_per_frame_s,accuracy,power_w,"
    "memory_mb,engine_build_s,engine_size_mb";

}  // namespace tpsched
