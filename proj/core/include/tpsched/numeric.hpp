#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>

namespace tpsched {

/// Slack used for all resource-budget comparisons. Budgets and usages are
/// O(1)-scale quantities (seconds, joules, watts, megabytes), so a mixed
/// absolute/relative test at 1e-9 is well below any meaningful difference
/// while absorbing accumulation error in sums like 0.02 + 0.03.
inline constexpr double kFeasEps = 1e-9;

inline bool leq(double x, double limit) {
  double slack = kFeasEps;
  double mag = limit < 0 ? -limit : limit;
  if (mag > 1.0) slack *= mag;
  return x <= limit + slack;
}

inline bool geq(double x, double limit) { return leq(limit, x); }

/// Whole frames fitting into an allocation. floor() with a small forgiveness
/// so that e.g. 0.95 / (0.02 + 0.03) counts as 19, not 18.
int frames_fitting(double alloc_seconds, double time_per_frame);

/// Shortest round-trip decimal form (std::to_chars). Used for every number
/// written to CSV/JSON/logs so that save->load is field-identical and reruns
/// are byte-identical.
std::string format_double(double v);

std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

/// Deterministic uniform draws on top of mt19937_64. The standard engine is
/// bit-exact across platforms; the distributions are not, so scaling is done
/// here by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  /// Uniform in [-1, 1).
  double signed_unit() { return 2.0 * unit() - 1.0; }

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(engine_() % span);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tpsched
