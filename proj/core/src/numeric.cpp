#include "tpsched/numeric.hpp"

#include <charconv>
#include <cmath>

namespace tpsched {

int frames_fitting(double alloc_seconds, double time_per_frame) {
  if (alloc_seconds <= 0.0) return 0;
  const double frames = alloc_seconds / time_per_frame;
  return static_cast<int>(std::floor(frames + 1e-9));
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) return std::nullopt;
  return v;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) return std::nullopt;
  return v;
}

}  // namespace tpsched
