// Command-line front end: profile-gen, pareto, solve, simulate, sweep, report.
//
// Every output file starts with a comment header carrying the tool version,
// the exact command line and the resolved configuration, so rerunning the
// command in the header reproduces the file byte for byte.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tpsched/errors.hpp"
#include "tpsched/json_io.hpp"
#include "tpsched/numeric.hpp"
#include "tpsched/optimizer.hpp"
#include "tpsched/pareto.hpp"
#include "tpsched/profiles.hpp"
#include "tpsched/runtime.hpp"
#include "tpsched/sim.hpp"
#include "tpsched/version.hpp"

namespace {

using namespace tpsched;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::string join_command(int argc, char** argv) {
  std::string cmd;
  for (int i = 0; i < argc; ++i) {
    if (i) cmd += ' ';
    cmd += argv[i];
  }
  return cmd;
}

std::string file_header(const std::string& command,
                        const std::vector<std::pair<std::string, std::string>>& config) {
  std::ostringstream out;
  out << "# tpsched " << kVersion << '\n';
  out << "# command: " << command << '\n';
  if (!config.empty()) {
    out << "# config:";
    for (const auto& [k, v] : config) out << ' ' << k << '=' << v;
    out << '\n';
  }
  return out.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing output file: " + path);
}

std::pair<double, double> parse_range_flag(const std::string& s, const std::string& flag) {
  const auto colon = s.find(':');
  if (colon == std::string::npos)
    throw CLI::ValidationError(flag, "expected lo:hi");
  auto lo = parse_double(s.substr(0, colon));
  auto hi = parse_double(s.substr(colon + 1));
  if (!lo || !hi) throw CLI::ValidationError(flag, "expected numeric lo:hi");
  return {*lo, *hi};
}

std::vector<double> parse_threshold_grid(const std::string& s) {
  // lo:hi:step, inclusive of hi up to a tiny tolerance
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  if (parts.size() != 3) throw CLI::ValidationError("--thresholds", "expected lo:hi:step");
  auto lo = parse_double(parts[0]);
  auto hi = parse_double(parts[1]);
  auto step = parse_double(parts[2]);
  if (!lo || !hi || !step || *step <= 0)
    throw CLI::ValidationError("--thresholds", "expected numeric lo:hi:step with step > 0");
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double v = *lo + i * *step;
    if (v > *hi + 1e-12) break;
    grid.push_back(v);
  }
  return grid;
}

ParetoMode mode_or_die(const std::string& name) {
  auto mode = parse_pareto_mode(name);
  if (!mode)
    throw CLI::ValidationError("--mode", "unknown mode '" + name + "'; valid modes: " +
                                             pareto_mode_names());
  return *mode;
}

Objective objective_or_die(const std::string& name) {
  auto obj = parse_objective(name);
  if (!obj)
    throw CLI::ValidationError(
        "--objective", "unknown objective '" + name +
                           "'; valid: max_accuracy, min_memory, min_energy");
  return *obj;
}

std::vector<Scheduler> schedulers_or_die(const std::string& csv) {
  std::vector<Scheduler> out;
  if (csv == "all") {
    out.assign(std::begin(kAllSchedulers), std::end(kAllSchedulers));
    return out;
  }
  std::stringstream ss(csv);
  std::string name;
  while (std::getline(ss, name, ',')) {
    auto s = parse_scheduler(name);
    if (!s)
      throw CLI::ValidationError("--schedulers",
                                 "unknown scheduler '" + name +
                                     "'; valid: transprecision, fair-fps, fair-time, greedy");
    out.push_back(*s);
  }
  if (out.empty()) throw CLI::ValidationError("--schedulers", "empty scheduler list");
  return out;
}

std::vector<ParetoMode> modes_or_die(const std::string& csv) {
  std::vector<ParetoMode> out;
  std::stringstream ss(csv);
  std::string name;
  while (std::getline(ss, name, ',')) out.push_back(mode_or_die(name));
  if (out.empty()) throw CLI::ValidationError("--modes", "empty mode list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string command_line = join_command(argc, argv);

  CLI::App app{"transprecision multi-task inference scheduler and simulator"};
  app.require_subcommand(1);
  int exit_code = kExitOk;

  // ---- profile-gen ---------------------------------------------------------
  auto* gen = app.add_subcommand("profile-gen", "generate a synthetic configuration-profile pool");
  struct {
    std::uint64_t seed = 7;
    int tasks = 5;
    int versions = 20;
    std::string time_range, speedup, power_half, build_half;
    double concavity = 12.0;
    double noise = 0.05;
    std::string params_file;
    std::string out;
  } g;
  gen->add_option("--seed", g.seed, "generator seed");
  gen->add_option("--tasks", g.tasks, "number of tasks");
  gen->add_option("--versions", g.versions, "configurations per task");
  gen->add_option("--time-range", g.time_range, "base seconds/frame as lo:hi");
  gen->add_option("--speedup-optimized", g.speedup, "optimized-backend speedup as lo:hi");
  gen->add_option("--power-ratio-half", g.power_half, "half-precision power ratio as lo:hi");
  gen->add_option("--build-ratio-half", g.build_half, "half-precision engine-build ratio as lo:hi");
  auto* opt_conc = gen->add_option("--concavity", g.concavity, "accuracy curve concavity");
  auto* opt_noise = gen->add_option("--noise", g.noise, "multiplicative noise, [0, 0.5)");
  gen->add_option("--params", g.params_file, "JSON sidecar with generator parameters");
  gen->add_option("-o,--out", g.out, "output CSV path")->required();

  gen->callback([&] {
    SynthesisParams p;
    if (!g.params_file.empty()) p = parse_synthesis_params_file(g.params_file, p);
    if (gen->count("--seed")) p.seed = g.seed;
    if (gen->count("--tasks")) p.tasks = g.tasks;
    if (gen->count("--versions")) p.versions_per_task = g.versions;
    if (!g.time_range.empty()) p.time_range = parse_range_flag(g.time_range, "--time-range");
    if (!g.speedup.empty()) p.speedup_optimized = parse_range_flag(g.speedup, "--speedup-optimized");
    if (!g.power_half.empty())
      p.power_ratio_half = parse_range_flag(g.power_half, "--power-ratio-half");
    if (!g.build_half.empty())
      p.build_ratio_half = parse_range_flag(g.build_half, "--build-ratio-half");
    if (opt_conc->count()) p.curve_concavity = g.concavity;
    if (opt_noise->count()) p.noise = g.noise;

    const ProfilePool pool = generate_synthetic(p);
    const auto header = file_header(
        command_line,
        {{"seed", std::to_string(p.seed)},
         {"tasks", std::to_string(p.tasks)},
         {"versions_per_task", std::to_string(p.versions_per_task)},
         {"time_range", format_double(p.time_range.first) + ":" + format_double(p.time_range.second)},
         {"speedup_optimized",
          format_double(p.speedup_optimized.first) + ":" + format_double(p.speedup_optimized.second)},
         {"power_ratio_half",
          format_double(p.power_ratio_half.first) + ":" + format_double(p.power_ratio_half.second)},
         {"build_ratio_half",
          format_double(p.build_ratio_half.first) + ":" + format_double(p.build_ratio_half.second)},
         {"curve_concavity", format_double(p.curve_concavity)},
         {"noise", format_double(p.noise)}});
    write_output(g.out, header + save_pool(pool));
  });

  // ---- pareto --------------------------------------------------------------
  auto* par = app.add_subcommand("pareto", "emit a per-task Pareto front");
  struct {
    std::string in, out = "-", mode = "time";
  } pa;
  par->add_option("--in", pa.in, "profile pool (CSV or JSON)")->required();
  par->add_option("--mode", pa.mode, "selection mode");
  par->add_option("--out", pa.out, "output CSV path (default stdout)");
  par->callback([&] {
    const ParetoMode mode = mode_or_die(pa.mode);
    const ProfilePool pool = load_pool_file(pa.in);
    const ParetoFront front = select_front(pool, mode);
    const auto header =
        file_header(command_line, {{"in", pa.in}, {"mode", std::string(to_string(mode))}});
    write_output(pa.out, header + save_front(front));
  });

  // ---- solve ---------------------------------------------------------------
  auto* sol = app.add_subcommand("solve", "solve one instance over a Pareto selection");
  struct {
    std::string pool, instance, mode = "time", objective, out = "-";
  } so;
  sol->add_option("--pool", so.pool, "profile pool")->required();
  sol->add_option("--instance", so.instance, "instance JSON")->required();
  sol->add_option("--mode", so.mode, "Pareto selection mode");
  sol->add_option("--objective", so.objective, "override the instance objective");
  sol->add_option("--out", so.out, "output JSON path (default stdout)");
  sol->callback([&] {
    const ParetoMode mode = mode_or_die(so.mode);
    const ProfilePool pool = load_pool_file(so.pool);
    Instance inst = parse_instance_file(so.instance);
    if (!so.objective.empty()) inst.objective = objective_or_die(so.objective);
    const ParetoFront front = select_front(pool, mode);
    CandidateView view(front);
    const Assignment result = solve_or_degrade(inst.tasks, view, inst.constraints, inst.objective);
    std::vector<std::pair<std::string, std::string>> meta = {
        {"command", command_line}, {"mode", std::string(to_string(mode))}};
    write_output(so.out, solution_to_json(result, inst.objective, meta));
  });

  // ---- simulate ------------------------------------------------------------
  auto* simc = app.add_subcommand("simulate", "run a workload trace through a scheduler");
  struct {
    std::string pool, scheduler = "transprecision", trace;
    bool random_trace = false;
    std::uint64_t seed = 1;
    int iterations = 100;
    int duration = 5;
    std::string fps_range = "1:30", acc_range = "0.7:1.0";
    std::string mem_frac = "0.4:0.9", energy_frac = "0.4:0.9", power_frac = "0:1";
    std::string objective = "max_accuracy", mode = "time";
    double solver_latency = 0.13;
    double fixed_build = -1;
    bool sequential_loads = false;
    std::string out = "-", log, summary;
    bool print_summary = false;
  } si;
  simc->add_option("--pool", si.pool, "profile pool")->required();
  simc->add_option("--scheduler", si.scheduler, "transprecision|fair-fps|fair-time|greedy");
  simc->add_option("--trace", si.trace, "trace JSON path");
  simc->add_flag("--random-trace", si.random_trace, "generate a seeded random trace");
  simc->add_option("--seed", si.seed, "random-trace seed");
  simc->add_option("--iterations", si.iterations, "random-trace iterations");
  simc->add_option("--duration", si.duration, "seconds per iteration");
  simc->add_option("--fps-range", si.fps_range, "random FPS demand as lo:hi");
  simc->add_option("--acc-range", si.acc_range, "random accuracy threshold as lo:hi");
  simc->add_option("--mem-frac", si.mem_frac, "memory budget fraction as lo:hi");
  simc->add_option("--energy-frac", si.energy_frac, "energy budget fraction as lo:hi");
  simc->add_option("--power-frac", si.power_frac, "peak power interpolation as lo:hi");
  simc->add_option("--objective", si.objective, "solver objective");
  simc->add_option("--mode", si.mode, "Pareto selection mode");
  simc->add_option("--solver-latency", si.solver_latency, "modeled solver latency, seconds");
  simc->add_option("--fixed-build", si.fixed_build, "fixed engine-build seconds (default: profile field)");
  simc->add_flag("--sequential-loads", si.sequential_loads, "serialize background engine loads");
  simc->add_option("--out", si.out, "metrics CSV path (default stdout)");
  simc->add_option("--log", si.log, "state-trajectory log path");
  simc->add_option("--summary", si.summary, "aggregate summary path");
  simc->add_flag("--print-summary", si.print_summary, "print the aggregate summary to stdout");
  simc->callback([&] {
    auto sched = parse_scheduler(si.scheduler);
    if (!sched)
      throw CLI::ValidationError("--scheduler",
                                 "unknown scheduler '" + si.scheduler +
                                     "'; valid: transprecision, fair-fps, fair-time, greedy");
    if (si.trace.empty() == !si.random_trace)
      throw CLI::ValidationError("--trace", "pass exactly one of --trace or --random-trace");

    const ProfilePool pool = load_pool_file(si.pool);
    Trace trace;
    if (!si.trace.empty()) {
      trace = parse_trace_file(si.trace);
    } else {
      StressRanges ranges;
      ranges.iterations = si.iterations;
      ranges.duration_s = si.duration;
      const auto fps = parse_range_flag(si.fps_range, "--fps-range");
      ranges.fps = {static_cast<int>(fps.first), static_cast<int>(fps.second)};
      ranges.accuracy_threshold = parse_range_flag(si.acc_range, "--acc-range");
      ranges.memory_fraction = parse_range_flag(si.mem_frac, "--mem-frac");
      ranges.energy_fraction = parse_range_flag(si.energy_frac, "--energy-frac");
      ranges.power_fraction = parse_range_flag(si.power_frac, "--power-frac");
      trace = gen_random_trace(pool, si.seed, ranges, objective_or_die(si.objective),
                               mode_or_die(si.mode));
    }

    OverheadModel overheads;
    overheads.solver_latency = si.solver_latency;
    if (si.fixed_build >= 0) {
      overheads.build_time_source = OverheadModel::BuildTimeSource::Fixed;
      overheads.fixed_build = si.fixed_build;
    }

    const RunResult result = run(pool, trace, *sched, overheads, si.sequential_loads);

    const auto header = file_header(
        command_line, {{"scheduler", std::string(to_string(*sched))},
                       {"seed", std::to_string(si.seed)},
                       {"iterations", std::to_string(static_cast<long>(trace.iterations.size()))},
                       {"solver_latency", format_double(overheads.solver_latency)}});
    write_output(si.out, header + metrics_csv(result));
    if (!si.log.empty()) {
      std::ostringstream log;
      log << header;
      for (const auto& line : result.state_log) log << line << '\n';
      write_output(si.log, log.str());
    }
    if (!si.summary.empty()) write_output(si.summary, header + aggregate_summary(result));
    if (si.print_summary) std::cout << aggregate_summary(result);
  });

  // ---- sweep ---------------------------------------------------------------
  auto* sw = app.add_subcommand("sweep", "demand or accuracy-threshold sweeps");
  struct {
    std::string pool, kind, out = "-";
    std::string schedulers = "all";
    int max_fps = kMaxFps;
    std::string objective = "min_memory";
    std::string modes;
    std::string thresholds = "0.7:1.0:0.02";
    int fps = 5;
  } sv;
  sw->add_option("--pool", sv.pool, "profile pool")->required();
  sw->add_option("--kind", sv.kind, "fps|accuracy")->required();
  sw->add_option("--schedulers", sv.schedulers, "comma list or 'all' (fps sweep)");
  sw->add_option("--max-fps", sv.max_fps, "upper end of the demand sweep");
  sw->add_option("--objective", sv.objective, "min_memory|min_energy (accuracy sweep)");
  sw->add_option("--modes", sv.modes, "comma list of Pareto modes (accuracy sweep)");
  sw->add_option("--thresholds", sv.thresholds, "accuracy grid as lo:hi:step");
  sw->add_option("--fps", sv.fps, "per-task demand during the accuracy sweep");
  sw->add_option("--out", sv.out, "output CSV path (default stdout)");
  sw->callback([&] {
    if (sv.kind != "fps" && sv.kind != "accuracy")
      throw CLI::ValidationError("--kind", "expected fps or accuracy");
    const ProfilePool pool = load_pool_file(sv.pool);
    if (sv.kind == "fps") {
      const auto schedulers = schedulers_or_die(sv.schedulers);
      const auto rows = sweep_fps(pool, schedulers, ConstraintSet{}, sv.max_fps);
      const auto header = file_header(command_line, {{"kind", "fps"},
                                                     {"schedulers", sv.schedulers},
                                                     {"max_fps", std::to_string(sv.max_fps)}});
      write_output(sv.out, header + fps_sweep_csv(pool, rows));
      return;
    }
    if (sv.kind == "accuracy") {
      const Objective obj = objective_or_die(sv.objective);
      std::string modes_csv = sv.modes;
      if (modes_csv.empty())
        modes_csv = obj == Objective::MinEnergy ? "time,time-energy,energy-only"
                                                : "time,time-memory,memory-only";
      const auto modes = modes_or_die(modes_csv);
      const auto grid = parse_threshold_grid(sv.thresholds);
      const auto rows = sweep_accuracy(pool, obj, modes, grid, sv.fps, ConstraintSet{});
      const auto header = file_header(command_line, {{"kind", "accuracy"},
                                                     {"objective", sv.objective},
                                                     {"modes", modes_csv},
                                                     {"thresholds", sv.thresholds},
                                                     {"fps", std::to_string(sv.fps)}});
      write_output(sv.out, header + accuracy_sweep_csv(rows));
      return;
    }
  });

  // ---- report --------------------------------------------------------------
  auto* rep = app.add_subcommand("report", "summarize a metrics CSV");
  struct {
    std::string metrics, out = "-";
  } re;
  rep->add_option("--metrics", re.metrics, "metrics CSV produced by simulate")->required();
  rep->add_option("--out", re.out, "summary path (default stdout)");
  rep->callback([&] {
    std::ifstream in(re.metrics, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open metrics file: " + re.metrics);
    std::string line;
    bool header_seen = false;
    struct Agg {
      long seconds = 0;
      double achieved = 0, accuracy = 0, energy = 0, time_used = 0;
      double peak_memory = 0, peak_power = 0;
      long overhead = 0;
    };
    std::map<std::string, Agg> by_scheduler;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      if (!header_seen) {
        if (line != kMetricsCsvHeader)
          throw std::runtime_error("unexpected metrics header: " + line);
        header_seen = true;
        continue;
      }
      std::vector<std::string> f;
      std::stringstream ss(line);
      std::string field;
      while (std::getline(ss, field, ',')) f.push_back(field);
      if (f.size() != 9) throw std::runtime_error("bad metrics row: " + line);
      Agg& a = by_scheduler[f[1]];
      ++a.seconds;
      a.achieved += parse_double(f[2]).value_or(0);
      a.accuracy += parse_double(f[3]).value_or(0);
      a.energy += parse_double(f[4]).value_or(0);
      a.peak_memory = std::max(a.peak_memory, parse_double(f[5]).value_or(0));
      a.peak_power = std::max(a.peak_power, parse_double(f[6]).value_or(0));
      a.time_used += parse_double(f[7]).value_or(0);
      a.overhead += parse_int(f[8]).value_or(0);
    }
    if (!header_seen) throw std::runtime_error("metrics file has no header: " + re.metrics);
    std::ostringstream out;
    out << file_header(command_line, {{"metrics", re.metrics}});
    for (const auto& [sched, a] : by_scheduler) {
      out << "scheduler=" << sched << " seconds=" << a.seconds
          << " mean_achieved_fps_pct=" << format_double(a.achieved / a.seconds)
          << " mean_accuracy=" << format_double(a.accuracy / a.seconds)
          << " total_energy_j=" << format_double(a.energy)
          << " peak_memory_mb=" << format_double(a.peak_memory)
          << " peak_power_w=" << format_double(a.peak_power)
          << " mean_time_used_s=" << format_double(a.time_used / a.seconds)
          << " overhead_frames=" << a.overhead << '\n';
    }
    write_output(re.out, out.str());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return exit_code;
}
