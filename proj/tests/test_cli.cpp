#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support/test_util.hpp"

using namespace tpsched;
using tptest::run_tool;
using tptest::slurp;
using tptest::spit;
using tptest::TempDir;

namespace {

int data_rows(const std::string& csv) {
  int rows = 0;
  std::stringstream ss(csv);
  std::string line;
  bool header_seen = false;
  while (std::getline(ss, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    ++rows;
  }
  return rows;
}

// v2 dominates v3 on (time, accuracy); on (memory, accuracy) v3 is the lean
// survivor. The two selections must therefore differ.
const char* kConflictPool =
    "task_id,version_id,precision,backend,time_per_frame_s,accuracy,power_w,memory_mb,"
    "engine_build_s,engine_size_mb\n"
    "t1,v1,single,standard,0.05,1.0,2,300,0.1,10\n"   // slow, fat reference
    "t1,v2,single,optimized,0.01,0.9,2,200,0.1,10\n"  // fast, mid memory
    "t1,v3,half,standard,0.02,0.85,2,100,0.1,10\n";   // slower and less accurate, but lean

}  // namespace

TEST_CASE("profile-gen writes the demanded number of rows deterministically") {
  TempDir dir("cli_gen");
  const std::string out = dir.file("pool.csv");
  const std::string args = "profile-gen --seed 7 --tasks 5 --versions 20 -o " + out;
  REQUIRE(run_tool(args).exit_code == 0);
  const std::string first = slurp(out);
  CHECK(data_rows(first) == 100);
  CHECK(first.rfind("# tpsched", 0) == 0);
  REQUIRE(run_tool(args).exit_code == 0);
  CHECK(slurp(out) == first);
}

TEST_CASE("profile-gen without an output path is a usage error") {
  const auto result = run_tool("profile-gen --seed 7");
  CHECK(result.exit_code == 2);
}

TEST_CASE("generated pools load back through the pareto subcommand") {
  TempDir dir("cli_roundtrip");
  const std::string pool = dir.file("pool.csv");
  REQUIRE(run_tool("profile-gen --seed 3 --tasks 2 --versions 8 -o " + pool).exit_code == 0);
  const std::string front = dir.file("front.csv");
  REQUIRE(run_tool("pareto --in " + pool + " --mode time --out " + front).exit_code == 0);
  CHECK(data_rows(slurp(front)) >= 2);  // at least the reference per task
}

TEST_CASE("pareto keeps one row of a dominated pair") {
  TempDir dir("cli_pareto");
  const std::string pool = dir.file("pool.csv");
  spit(pool,
       "task_id,version_id,precision,backend,time_per_frame_s,accuracy,power_w,memory_mb,"
       "engine_build_s,engine_size_mb\n"
       "t1,v1,single,standard,1.0,1.0,2,100,0.1,10\n"
       "t1,v2,single,standard,2.0,0.8,2,100,0.1,10\n");
  const std::string front = dir.file("front.csv");
  REQUIRE(run_tool("pareto --in " + pool + " --mode time --out " + front).exit_code == 0);
  const std::string csv = slurp(front);
  CHECK(data_rows(csv) == 1);
  CHECK(csv.find("v1") != std::string::npos);
}

TEST_CASE("pareto memory-only differs from time on a crafted conflict pool") {
  TempDir dir("cli_modes");
  const std::string pool = dir.file("pool.csv");
  spit(pool, kConflictPool);
  const std::string ft = dir.file("ft.csv");
  const std::string fm = dir.file("fm.csv");
  REQUIRE(run_tool("pareto --in " + pool + " --mode time --out " + ft).exit_code == 0);
  REQUIRE(run_tool("pareto --in " + pool + " --mode memory-only --out " + fm).exit_code == 0);
  const std::string time_front = slurp(ft);
  const std::string mem_front = slurp(fm);
  CHECK(time_front.find("t1,v2") != std::string::npos);
  CHECK(time_front.find("t1,v3") == std::string::npos);  // dominated by v2
  CHECK(mem_front.find("t1,v3") != std::string::npos);   // lean point survives
}

TEST_CASE("pareto rejects an unknown mode and lists the five valid ones") {
  const auto result = run_tool("pareto --in nowhere.csv --mode fastest");
  CHECK(result.exit_code == 2);
  for (const char* name : {"time", "time-memory", "memory-only", "time-energy", "energy-only"})
    CHECK(result.output.find(name) != std::string::npos);
}

TEST_CASE("solve emits the chosen versions and objective") {
  TempDir dir("cli_solve");
  const std::string pool = dir.file("pool.csv");
  spit(pool,
       "task_id,version_id,precision,backend,time_per_frame_s,accuracy,power_w,memory_mb,"
       "engine_build_s,engine_size_mb\n"
       "t1,A,single,standard,0.02,1.0,3,120,0.1,10\n"
       "t1,B,single,optimized,0.01,0.9,2,80,0.1,10\n"
       "t2,C,single,standard,0.03,1.0,4,200,0.1,10\n"
       "t2,D,single,optimized,0.015,0.85,2.5,90,0.1,10\n");
  const std::string inst = dir.file("inst.json");
  spit(inst, R"({"tasks":[{"id":"t1","fps":20},{"id":"t2","fps":20}],
                 "constraints":{"time_budget":0.95},"objective":"max_accuracy"})");
  const auto result = run_tool("solve --pool " + pool + " --instance " + inst + " --mode time");
  REQUIRE(result.exit_code == 0);
  CHECK(result.output.find("\"B\"") != std::string::npos);
  CHECK(result.output.find("\"C\"") != std::string::npos);
  CHECK(result.output.find("\"objective\": 1.9") != std::string::npos);
  CHECK(result.output.find("\"degraded\": false") != std::string::npos);
}

TEST_CASE("solve degrades an infeasible instance and says so") {
  TempDir dir("cli_degrade");
  const std::string pool = dir.file("pool.csv");
  spit(pool,
       "task_id,version_id,precision,backend,time_per_frame_s,accuracy,power_w,memory_mb,"
       "engine_build_s,engine_size_mb\n"
       "t1,only,single,standard,0.03,1.0,2,100,0.1,10\n"
       "t2,only,single,standard,0.03,1.0,2,100,0.1,10\n");
  const std::string inst = dir.file("inst.json");
  spit(inst, R"({"tasks":[{"id":"t1","fps":20},{"id":"t2","fps":20}]})");
  const auto result = run_tool("solve --pool " + pool + " --instance " + inst);
  REQUIRE(result.exit_code == 0);
  CHECK(result.output.find("\"degraded\": true") != std::string::npos);
  CHECK(result.output.find("exceeds budget") != std::string::npos);  // violation diagnosis
}

TEST_CASE("solve with min_energy picks the cheapest threshold-feasible config") {
  TempDir dir("cli_energy");
  const std::string pool = dir.file("pool.csv");
  spit(pool,
       "task_id,version_id,precision,backend,time_per_frame_s,accuracy,power_w,memory_mb,"
       "engine_build_s,engine_size_mb\n"
       "t1,ref,single,standard,0.04,1.0,5,100,0.1,10\n"    // 0.2 J/frame
       "t1,eco,half,optimized,0.02,0.9,1,80,0.05,5\n"      // 0.02 J/frame
       "t1,meh,single,optimized,0.01,0.7,4,90,0.05,5\n");  // 0.04 J/frame but low accuracy
  const std::string inst = dir.file("inst.json");
  spit(inst, R"({"tasks":[{"id":"t1","fps":10,"acc_th":0.85}],"objective":"min_energy"})");
  const auto result = run_tool("solve --pool " + pool + " --instance " + inst +
                               " --mode energy-only");
  REQUIRE(result.exit_code == 0);
  CHECK(result.output.find("\"eco\"") != std::string::npos);
}

TEST_CASE("simulate writes the pinned metrics header and replays byte-identically") {
  TempDir dir("cli_sim");
  const std::string pool = dir.file("pool.csv");
  REQUIRE(run_tool("profile-gen --seed 7 --tasks 3 --versions 12 -o " + pool).exit_code == 0);
  const std::string metrics = dir.file("metrics.csv");
  const std::string log = dir.file("state.log");
  const std::string args = "simulate --pool " + pool +
                           " --scheduler transprecision --random-trace --seed 11 "
                           "--iterations 6 --out " + metrics + " --log " + log;
  REQUIRE(run_tool(args).exit_code == 0);
  const std::string first_metrics = slurp(metrics);
  const std::string first_log = slurp(log);
  CHECK(first_metrics.find("second,scheduler,achieved_fps_pct,avg_accuracy,energy_j,memory_mb,"
                           "peak_power_w,time_used_s,overhead_frames\n") != std::string::npos);
  CHECK(data_rows(first_metrics) == 30);
  REQUIRE(run_tool(args).exit_code == 0);
  CHECK(slurp(metrics) == first_metrics);
  CHECK(slurp(log) == first_log);
}

TEST_CASE("simulate accepts a trace file for every scheduler") {
  TempDir dir("cli_trace");
  const std::string pool = dir.file("pool.csv");
  REQUIRE(run_tool("profile-gen --seed 7 --tasks 2 --versions 8 -o " + pool).exit_code == 0);
  const std::string trace = dir.file("trace.json");
  spit(trace, R"({"iterations":[
      {"duration_s":2,"tasks":[{"id":"t1","fps":8},{"id":"t2","fps":8}],
       "constraints":{"time_budget":0.95},"objective":"max_accuracy","mode":"time"},
      {"duration_s":2,"tasks":[{"id":"t1","fps":3},{"id":"t2","fps":12}],
       "constraints":{"time_budget":0.95},"objective":"max_accuracy","mode":"time"}]})");
  for (const char* sched : {"transprecision", "fair-fps", "fair-time", "greedy"}) {
    const auto result = run_tool("simulate --pool " + pool + " --trace " + trace +
                                 " --scheduler " + sched + " --out -");
    REQUIRE(result.exit_code == 0);
    CHECK(data_rows(result.output) == 4);
  }
}

TEST_CASE("sweep --kind fps emits 30 x 4 rows") {
  TempDir dir("cli_sweep");
  const std::string pool = dir.file("pool.csv");
  REQUIRE(run_tool("profile-gen --seed 7 --tasks 5 --versions 20 -o " + pool).exit_code == 0);
  const auto result = run_tool("sweep --pool " + pool + " --kind fps --schedulers all --out -");
  REQUIRE(result.exit_code == 0);
  CHECK(data_rows(result.output) == 30 * 4);
  CHECK(result.output.find("fps,scheduler,achieved_fps_pct,avg_accuracy,total_time_s,time_t1_s") !=
        std::string::npos);
}

TEST_CASE("sweep --kind accuracy produces the threshold x mode table") {
  TempDir dir("cli_sweep_acc");
  const std::string pool = dir.file("pool.csv");
  REQUIRE(run_tool("profile-gen --seed 7 --tasks 5 --versions 20 -o " + pool).exit_code == 0);
  const auto result = run_tool("sweep --pool " + pool +
                               " --kind accuracy --objective min_memory "
                               "--modes time,time-memory,memory-only "
                               "--thresholds 0.7:1.0:0.05 --out -");
  REQUIRE(result.exit_code == 0);
  CHECK(data_rows(result.output) == 7 * 3);
  CHECK(result.output.find("threshold,mode,avg_accuracy,total_memory_mb,total_energy_j,"
                           "total_time_s") != std::string::npos);
}

TEST_CASE("report summarizes a metrics file per scheduler") {
  TempDir dir("cli_report");
  const std::string pool = dir.file("pool.csv");
  REQUIRE(run_tool("profile-gen --seed 7 --tasks 2 --versions 8 -o " + pool).exit_code == 0);
  const std::string metrics = dir.file("metrics.csv");
  REQUIRE(run_tool("simulate --pool " + pool +
                   " --scheduler greedy --random-trace --seed 2 --iterations 4 --out " +
                   metrics).exit_code == 0);
  const auto result = run_tool("report --metrics " + metrics);
  REQUIRE(result.exit_code == 0);
  CHECK(result.output.find("scheduler=greedy") != std::string::npos);
  CHECK(result.output.find("mean_achieved_fps_pct=") != std::string::npos);
}

TEST_CASE("runtime failures exit 1, usage errors exit 2") {
  CHECK(run_tool("pareto --in /does/not/exist.csv --mode time").exit_code == 1);
  CHECK(run_tool("sweep --pool x.csv --kind sideways").exit_code == 2);
  CHECK(run_tool("simulate --pool x.csv --scheduler greedy").exit_code == 2);  // no trace source
  CHECK(run_tool("definitely-not-a-subcommand").exit_code == 2);
  CHECK(run_tool("--help").exit_code == 0);
}
