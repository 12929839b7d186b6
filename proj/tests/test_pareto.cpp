#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support/test_util.hpp"
#include "tpsched/errors.hpp"
#include "tpsched/pareto.hpp"

using namespace tpsched;
using tptest::cfg;

TEST_CASE("dominates: better in accuracy and time") {
  const auto a = cfg("t1", "a", 0.01, 0.9);
  const auto b = cfg("t1", "b", 0.02, 0.8);
  CHECK(dominates(a, b, ParetoMode::Time));
  CHECK_FALSE(dominates(b, a, ParetoMode::Time));
}

TEST_CASE("dominates: identical vectors do not dominate") {
  const auto a = cfg("t1", "a", 0.01, 0.9);
  auto b = a;
  b.version_id = "b";
  CHECK_FALSE(dominates(a, b, ParetoMode::Time));
  CHECK_FALSE(dominates(a, b, ParetoMode::TimeMemory));
}

TEST_CASE("dominates: incomparable under two cost dimensions") {
  const auto a = cfg("t1", "a", 0.01, 0.9, 2.0, 90.0);
  const auto b = cfg("t1", "b", 0.02, 0.8, 2.0, 80.0);
  CHECK_FALSE(dominates(a, b, ParetoMode::TimeMemory));
  CHECK_FALSE(dominates(b, a, ParetoMode::TimeMemory));
  CHECK(dominates(a, b, ParetoMode::Time));  // memory out of play
}

TEST_CASE("dominates: energy means the power-time product") {
  const auto a = cfg("t1", "a", 0.02, 0.9, 1.0);  // 0.02 J
  const auto b = cfg("t1", "b", 0.01, 0.8, 4.0);  // 0.04 J
  CHECK(dominates(a, b, ParetoMode::EnergyOnly));
  CHECK_FALSE(dominates(a, b, ParetoMode::Time));
}

TEST_CASE("dominates across tasks is a contract violation") {
  CHECK_THROWS_AS(dominates(cfg("t1", "a", 0.01, 0.9), cfg("t2", "b", 0.02, 0.8), ParetoMode::Time),
                  ContractViolation);
}

TEST_CASE("select_front drops the dominated point of a pair") {
  const ProfilePool pool =
      ProfilePool::from_configs({cfg("t1", "v1", 1.0, 1.0), cfg("t1", "v2", 2.0, 0.8)});
  const ParetoFront front = select_front(pool, ParetoMode::Time);
  REQUIRE(front.members_for("t1").size() == 1);
  CHECK(front.members_for("t1").front().version_id == "v1");
}

TEST_CASE("select_front keeps a single-config task") {
  const ProfilePool pool = ProfilePool::from_configs({cfg("t1", "v1", 1.0, 1.0)});
  const ParetoFront front = select_front(pool, ParetoMode::MemoryOnly);
  CHECK(front.members_for("t1").size() == 1);
}

TEST_CASE("duplicate vectors: lexicographically smallest version survives") {
  // the reference is strictly worse on every cost axis, so the duplicate
  // pair is non-dominated under all five modes
  auto a = cfg("t1", "v9", 0.9, 1.0, 2.0, 200.0);
  auto b = cfg("t1", "v2", 0.5, 0.9, 2.0, 100.0);
  auto c = b;
  c.version_id = "v10";  // identical vector to v2; "v10" < "v2" lexicographically
  const ProfilePool pool = ProfilePool::from_configs({a, b, c});
  for (ParetoMode mode : kAllParetoModes) {
    const ParetoFront front = select_front(pool, mode);
    const auto members = front.members_for("t1");
    int dup_survivors = 0;
    for (const auto& m : members)
      if (m.accuracy == 0.9) {
        ++dup_survivors;
        CHECK(m.version_id == "v10");
      }
    CHECK(dup_survivors == 1);
  }
}

TEST_CASE("select_front matches the all-pairs oracle on random pools") {
  Rng rng(2024);
  for (int i = 0; i < 30; ++i) {
    const ProfilePool pool = tptest::random_pool(rng, 3, 60);
    for (ParetoMode mode : kAllParetoModes) {
      const ParetoFront front = select_front(pool, mode);
      for (const auto& task : pool.task_ids()) {
        const auto expected = tptest::pareto_oracle(pool.configs_for(task), mode);
        CHECK(tptest::same_config_set(front.members_for(task), expected));
      }
    }
  }
}

TEST_CASE("select_front is idempotent") {
  Rng rng(7);
  for (int i = 0; i < 10; ++i) {
    const ProfilePool pool = tptest::random_pool(rng, 2, 40);
    for (ParetoMode mode : kAllParetoModes) {
      const ParetoFront once = select_front(pool, mode);
      std::vector<ConfigProfile> members;
      for (const auto& task : once.task_ids())
        for (const auto& c : once.members_for(task)) members.push_back(c);
      const ParetoFront twice = select_front(ProfilePool::from_configs(members), mode);
      for (const auto& task : once.task_ids())
        CHECK(tptest::same_config_set(once.members_for(task), twice.members_for(task)));
    }
  }
}

TEST_CASE("fronts are ordered by first cost; single-cost fronts ascend in accuracy") {
  Rng rng(11);
  for (int i = 0; i < 10; ++i) {
    const ProfilePool pool = tptest::random_pool(rng, 2, 50);
    for (ParetoMode mode : kAllParetoModes) {
      const ParetoFront front = select_front(pool, mode);
      const bool single_cost = mode == ParetoMode::Time || mode == ParetoMode::MemoryOnly ||
                               mode == ParetoMode::EnergyOnly;
      for (const auto& task : front.task_ids()) {
        const auto members = front.members_for(task);
        for (std::size_t k = 1; k < members.size(); ++k) {
          const double prev = mode_costs(members[k - 1], mode)[0];
          const double cur = mode_costs(members[k], mode)[0];
          CHECK(prev <= cur);
          if (single_cost && prev < cur) CHECK(members[k - 1].accuracy < members[k].accuracy);
        }
      }
    }
  }
}

TEST_CASE("every front keeps the accuracy-1.0 reference") {
  Rng rng(3);
  const ProfilePool pool = tptest::random_pool(rng, 3, 40);
  for (ParetoMode mode : kAllParetoModes) {
    const ParetoFront front = select_front(pool, mode);
    for (const auto& task : front.task_ids()) {
      bool has_reference = false;
      for (const auto& c : front.members_for(task))
        if (c.accuracy == 1.0) has_reference = true;
      CHECK(has_reference);
    }
  }
}

TEST_CASE("front CSV carries the mode column") {
  const ProfilePool pool = ProfilePool::from_configs({cfg("t1", "v1", 1.0, 1.0)});
  const std::string csv = save_front(select_front(pool, ParetoMode::TimeEnergy));
  CHECK(csv.find(",mode\n") != std::string::npos);
  CHECK(csv.find(",time-energy\n") != std::string::npos);
}

TEST_CASE("mode names parse and print") {
  for (ParetoMode mode : kAllParetoModes) CHECK(parse_pareto_mode(to_string(mode)) == mode);
  CHECK_FALSE(parse_pareto_mode("power-only").has_value());
  CHECK(pareto_mode_names() ==
        "time, time-memory, memory-only, time-energy, energy-only");
}
