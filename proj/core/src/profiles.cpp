#include "tpsched/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tpsched/errors.hpp"
#include "tpsched/numeric.hpp"

#include "json.hpp"

namespace tpsched {

namespace {

std::string locus(const ConfigProfile& c) {
  return "(" + c.task_id + ", " + c.version_id + ")";
}

// Generator constants not exposed as SynthesisParams. Calibrated alongside
// the param defaults: half precision runs at roughly single-precision speed,
// needs less memory, and stores a smaller engine.
constexpr std::pair<double, double> kHalfTimeSpeedup = {1.0, 1.15};
constexpr std::pair<double, double> kHalfMemoryRatio = {0.6, 0.9};
constexpr std::pair<double, double> kOptimizedMemoryJitter = {0.85, 1.15};
constexpr std::pair<double, double> kEngineSizeRatio = {0.15, 0.35};
constexpr double kPowerBase = 1.5;    // watts at t -> 0
constexpr double kPowerSpan = 4.5;    // watts added at t = t_max
constexpr double kPowerExp = 0.6;
constexpr double kMemoryBase = 40.0;  // megabytes
constexpr double kMemorySpan = 360.0;
constexpr double kMemoryExp = 0.8;
constexpr double kBuildFloor = 0.02;      // seconds; builds average 20-80 ms
constexpr double kBuildPerMb = 0.0005;    // seconds per engine megabyte
constexpr double kBuildCap = 0.4;         // seconds, validated runtime bound
constexpr double kAccuracyCap = 0.998;    // everything but the reference
constexpr double kAccuracyFloor = 0.02;

}  // namespace

std::string_view to_string(Precision p) {
  return p == Precision::Single ? "single" : "half";
}

std::string_view to_string(Backend b) {
  return b == Backend::Standard ? "standard" : "optimized";
}

ProfilePool ProfilePool::from_configs(std::vector<ConfigProfile> configs) {
  ProfilePool pool;
  for (auto& c : configs) {
    if (c.task_id.empty() || c.version_id.empty())
      throw ValidationError("config " + locus(c) + ": empty identifier");
    if (!(c.time_per_frame > 0))
      throw ValidationError("config " + locus(c) + ": time_per_frame must be > 0");
    if (!(c.accuracy > 0) || c.accuracy > 1.0)
      throw ValidationError("config " + locus(c) + ": accuracy must be in (0, 1]");
    if (!(c.power > 0))
      throw ValidationError("config " + locus(c) + ": power must be > 0");
    if (!(c.memory > 0))
      throw ValidationError("config " + locus(c) + ": memory must be > 0");
    if (c.engine_build_time < 0)
      throw ValidationError("config " + locus(c) + ": engine_build_time must be >= 0");
    if (c.engine_size < 0)
      throw ValidationError("config " + locus(c) + ": engine_size must be >= 0");

    auto [it, inserted] = pool.by_task_.try_emplace(c.task_id);
    if (inserted) pool.task_order_.push_back(c.task_id);
    for (const auto& existing : it->second) {
      if (existing.version_id == c.version_id)
        throw ValidationError("duplicate id " + locus(c));
    }
    it->second.push_back(std::move(c));
  }
  if (pool.by_task_.empty()) throw ValidationError("pool has no configurations");
  for (const auto& [task, versions] : pool.by_task_) {
    int references = 0;
    for (const auto& c : versions)
      if (c.accuracy == 1.0) ++references;
    if (references != 1)
      throw ValidationError("task " + task + ": expected exactly one accuracy-1.0 configuration, found " +
                            std::to_string(references));
  }
  return pool;
}

std::span<const ConfigProfile> ProfilePool::configs_for(std::string_view task_id) const {
  auto it = by_task_.find(task_id);
  if (it == by_task_.end())
    throw ValidationError("unknown task id: " + std::string(task_id));
  return it->second;
}

const ConfigProfile& ProfilePool::reference_config(std::string_view task_id) const {
  for (const auto& c : configs_for(task_id))
    if (c.accuracy == 1.0) return c;
  throw ValidationError("task " + std::string(task_id) + " has no reference configuration");
}

const ConfigProfile* ProfilePool::find(std::string_view task_id, std::string_view version_id) const {
  auto it = by_task_.find(task_id);
  if (it == by_task_.end()) return nullptr;
  for (const auto& c : it->second)
    if (c.version_id == version_id) return &c;
  return nullptr;
}

std::size_t ProfilePool::total_configs() const {
  std::size_t n = 0;
  for (const auto& [task, versions] : by_task_) n += versions.size();
  return n;
}

bool ProfilePool::has_task(std::string_view task_id) const {
  return by_task_.find(task_id) != by_task_.end();
}

void validate(const SynthesisParams& p) {
  auto require_range = [](std::pair<double, double> r, double lo_min, const char* name) {
    if (!(r.first >= lo_min) || !(r.second >= r.first))
      throw ValidationError(std::string("synthesis params: bad range ") + name);
  };
  if (p.tasks < 1 || p.versions_per_task < 1)
    throw ValidationError("synthesis params: counts must be >= 1");
  require_range(p.time_range, 1e-6, "time_range");
  require_range(p.speedup_optimized, 1.0, "speedup_optimized");
  require_range(p.power_ratio_half, 1e-6, "power_ratio_half");
  require_range(p.build_ratio_half, 0.0, "build_ratio_half");
  if (!(p.curve_concavity > 0))
    throw ValidationError("synthesis params: curve_concavity must be > 0");
  if (p.noise < 0 || p.noise >= 0.5)
    throw ValidationError("synthesis params: noise must be in [0, 0.5)");
}

ProfilePool generate_synthetic(const SynthesisParams& params) {
  validate(params);
  Rng rng(params.seed);
  std::vector<ConfigProfile> configs;
  configs.reserve(static_cast<std::size_t>(params.tasks) * params.versions_per_task);

  const double t_hi = params.time_range.second;

  for (int ti = 1; ti <= params.tasks; ++ti) {
    const std::string task_id = "t" + std::to_string(ti);
    const int versions = params.versions_per_task;
    const int bases = (versions + 3) / 4;

    // Base variants stand for model truncations; each expands into up to four
    // (precision, backend) implementations. Slowest base first, so its
    // single/standard implementation is the task's reference model.
    std::vector<double> base_time(bases);
    for (auto& t : base_time) t = rng.uniform(params.time_range.first, params.time_range.second);
    std::sort(base_time.begin(), base_time.end(), std::greater<>());
    const double t_ref = base_time.front();

    int emitted = 0;
    for (int b = 0; b < bases && emitted < versions; ++b) {
      const double speedup = rng.uniform(params.speedup_optimized.first, params.speedup_optimized.second);
      const double half_speed = rng.uniform(kHalfTimeSpeedup.first, kHalfTimeSpeedup.second);

      const double mem_single = kMemoryBase + kMemorySpan * std::pow(base_time[b] / t_hi, kMemoryExp);
      const double pow_single = kPowerBase + kPowerSpan * std::pow(base_time[b] / t_hi, kPowerExp);

      for (int combo = 0; combo < 4 && emitted < versions; ++combo, ++emitted) {
        ConfigProfile c;
        c.task_id = task_id;
        c.precision = (combo >= 2) ? Precision::Half : Precision::Single;
        c.backend = (combo % 2 == 1) ? Backend::Optimized : Backend::Standard;
        {
          char vid[16];
          std::snprintf(vid, sizeof(vid), "v%03d", emitted + 1);
          c.version_id = vid;
        }

        double t = base_time[b];
        if (c.precision == Precision::Half) t /= half_speed;
        if (c.backend == Backend::Optimized) t /= speedup;
        c.time_per_frame = t;

        double mem = mem_single * (1.0 + params.noise * rng.signed_unit());
        if (c.backend == Backend::Optimized)
          mem *= rng.uniform(kOptimizedMemoryJitter.first, kOptimizedMemoryJitter.second);
        if (c.precision == Precision::Half)
          mem *= rng.uniform(kHalfMemoryRatio.first, kHalfMemoryRatio.second);
        c.memory = std::max(1.0, mem);

        double watts = pow_single * (1.0 + params.noise * rng.signed_unit());
        if (c.precision == Precision::Half)
          watts *= rng.uniform(params.power_ratio_half.first, params.power_ratio_half.second);
        c.power = std::max(0.2, watts);

        double size = c.memory * rng.uniform(kEngineSizeRatio.first, kEngineSizeRatio.second);
        double build = kBuildFloor + kBuildPerMb * size;
        if (c.precision == Precision::Half) {
          const double ratio = rng.uniform(params.build_ratio_half.first, params.build_ratio_half.second);
          size *= ratio;
          build *= ratio;
        }
        c.engine_size = size;
        c.engine_build_time = std::min(kBuildCap, build);

        const bool is_reference = (b == 0 && combo == 0);
        const double noise_draw = rng.signed_unit();  // drawn unconditionally to keep streams aligned
        if (is_reference) {
          c.accuracy = 1.0;
        } else {
          double acc = std::pow(t / t_ref, 1.0 / params.curve_concavity);
          acc *= 1.0 + params.noise * noise_draw;
          c.accuracy = std::clamp(acc, kAccuracyFloor, kAccuracyCap);
        }
        configs.push_back(std::move(c));
      }
    }
  }
  return ProfilePool::from_configs(std::move(configs));
}

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(std::move(cur));
  for (auto& f : fields) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.erase(f.begin());
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.pop_back();
  }
  return fields;
}

Precision parse_precision(std::string_view s, const std::string& where) {
  if (s == "single") return Precision::Single;
  if (s == "half") return Precision::Half;
  throw ParseError(where + ": precision must be 'single' or 'half', got '" + std::string(s) + "'");
}

Backend parse_backend(std::string_view s, const std::string& where) {
  if (s == "standard") return Backend::Standard;
  if (s == "optimized") return Backend::Optimized;
  throw ParseError(where + ": backend must be 'standard' or 'optimized', got '" + std::string(s) + "'");
}

double parse_field(const std::string& raw, const std::string& where, const char* name) {
  auto v = parse_double(raw);
  if (!v) throw ParseError(where + ": bad numeric field " + name + " '" + raw + "'");
  return *v;
}

ProfilePool load_pool_csv(std::string_view source) {
  std::vector<ConfigProfile> configs;
  std::istringstream in{std::string(source)};
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = line;
    while (!sv.empty() && (sv.back() == '\r' || sv.back() == '\n')) sv.remove_suffix(1);
    if (sv.empty() || sv.front() == '#') continue;
    const std::string where = "line " + std::to_string(lineno);
    auto fields = split_csv_line(sv);
    if (!header_seen) {
      std::string joined;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) joined.push_back(',');
        joined += fields[i];
      }
      if (joined != kPoolCsvHeader)
        throw ParseError(where + ": unexpected header '" + joined + "'");
      header_seen = true;
      continue;
    }
    if (fields.size() != 10)
      throw ParseError(where + ": expected 10 fields, got " + std::to_string(fields.size()));
    ConfigProfile c;
    c.task_id = fields[0];
    c.version_id = fields[1];
    c.precision = parse_precision(fields[2], where);
    c.backend = parse_backend(fields[3], where);
    c.time_per_frame = parse_field(fields[4], where, "time_per_frame_s");
    c.accuracy = parse_field(fields[5], where, "accuracy");
    c.power = parse_field(fields[6], where, "power_w");
    c.memory = parse_field(fields[7], where, "memory_mb");
    c.engine_build_time = parse_field(fields[8], where, "engine_build_s");
    c.engine_size = parse_field(fields[9], where, "engine_size_mb");
    configs.push_back(std::move(c));
  }
  if (!header_seen) throw ParseError("empty profile file");
  return ProfilePool::from_configs(std::move(configs));
}

ConfigProfile config_from_json(const nlohmann::json& rec, const std::string& where) {
  if (!rec.is_object()) throw ParseError(where + ": expected an object");
  auto need = [&](const char* key) -> const nlohmann::json& {
    auto it = rec.find(key);
    if (it == rec.end()) throw ParseError(where + ": missing field " + key);
    return *it;
  };
  auto num = [&](const char* key) {
    const auto& v = need(key);
    if (!v.is_number()) throw ParseError(where + ": field " + key + " must be a number");
    return v.get<double>();
  };
  ConfigProfile c;
  c.task_id = need("task_id").get<std::string>();
  c.version_id = need("version_id").get<std::string>();
  c.precision = parse_precision(need("precision").get<std::string>(), where);
  c.backend = parse_backend(need("backend").get<std::string>(), where);
  c.time_per_frame = num("time_per_frame_s");
  c.accuracy = num("accuracy");
  c.power = num("power_w");
  c.memory = num("memory_mb");
  c.engine_build_time = num("engine_build_s");
  c.engine_size = num("engine_size_mb");
  return c;
}

ProfilePool load_pool_json(std::string_view source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(source);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("JSON parse error: ") + e.what());
  }
  const nlohmann::json* records = nullptr;
  if (doc.is_array()) {
    records = &doc;
  } else if (doc.is_object() && doc.contains("configs") && doc["configs"].is_array()) {
    records = &doc["configs"];
  } else {
    throw ParseError("JSON pool must be an array of records or {\"configs\": [...]}");
  }
  std::vector<ConfigProfile> configs;
  configs.reserve(records->size());
  for (std::size_t i = 0; i < records->size(); ++i)
    configs.push_back(config_from_json((*records)[i], "record " + std::to_string(i)));
  return ProfilePool::from_configs(std::move(configs));
}

}  // namespace

ProfilePool load_pool(std::string_view source) {
  std::size_t i = 0;
  while (i < source.size() && (source[i] == ' ' || source[i] == '\t' || source[i] == '\n' || source[i] == '\r'))
    ++i;
  if (i < source.size() && (source[i] == '{' || source[i] == '['))
    return load_pool_json(source);
  return load_pool_csv(source);
}

ProfilePool load_pool_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open profile file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_pool(buf.str());
}

void save_pool(const ProfilePool& pool, std::ostream& out) {
  out << kPoolCsvHeader << '\n';
  for (const auto& task : pool.task_ids()) {
    for (const auto& c : pool.configs_for(task)) {
      out << c.task_id << ',' << c.version_id << ',' << to_string(c.precision) << ','
          << to_string(c.backend) << ',' << format_double(c.time_per_frame) << ','
          << format_double(c.accuracy) << ',' << format_double(c.power) << ','
          << format_double(c.memory) << ',' << format_double(c.engine_build_time) << ','
          << format_double(c.engine_size) << '\n';
    }
  }
}

std::string save_pool(const ProfilePool& pool) {
  std::ostringstream out;
  save_pool(pool, out);
  return out.str();
}

}  // namespace tpsched
