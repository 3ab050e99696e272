#include "stlshield/environment.hpp"
#include "stlshield/errors.hpp"
#include "stlshield/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace stlshield;
using namespace stlshield::sim;
using world::cell_center;

namespace {

world::Environment corridor() {
  world::Environment env;
  env.goals = {6, 20, 30};
  env.homes = world::corner_cells();
  const auto c = cell_center(1);
  env.ego_init = {c.x(), c.y(), 0.0};
  return env;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char ch : s) n += ch == '\n';
  return n;
}

}  // namespace

TEST_CASE("replan interval") {
  TrialConfig cfg;
  CHECK(replan_interval(cfg) == 8);
  cfg.dt = 0.05;
  CHECK(replan_interval(cfg) == 5);
  cfg.dt = 0.1;
  CHECK(replan_interval(cfg) == 3);
}

TEST_CASE("outcome names round-trip") {
  for (auto o : {Outcome::GoalReached, Outcome::Timeout, Outcome::Violation, Outcome::Aborted})
    CHECK(parse_outcome(outcome_name(o)) == o);
  CHECK(outcome_name(Outcome::GoalReached) == "goal_reached");
  CHECK_THROWS_AS(parse_outcome("won"), InputError);
}

TEST_CASE("trials are deterministic in the seed") {
  TrialConfig cfg;
  cfg.seed = 3;
  cfg.duration = 20.0;
  CHECK(log_json(run_trial(cfg)) == log_json(run_trial(cfg)));
}

TEST_CASE("starting inside a goal cell ends at once") {
  world::Environment env = world::generate_environment(5);
  const auto g = cell_center(env.goals.front());
  env.ego_init = {g.x() + 0.05, g.y(), 1.0};
  TrialConfig cfg;
  cfg.environment = env;
  const TrialLog log = run_trial(cfg);
  CHECK(log.outcome == Outcome::GoalReached);
  CHECK(log.steps.size() == 1);
  CHECK(log.steps.back().p <= 0.2);
}

TEST_CASE("obstacle-free corridor") {
  TrialConfig cfg;
  cfg.environment = corridor();
  const TrialLog log = run_trial(cfg);
  CHECK(log.outcome == Outcome::GoalReached);
  CHECK(log.steps.back().goal_cell == 6);
  const auto row = summarize(log);
  CHECK(row.min_h >= -1e-6);
  CHECK(row.plan_failures == 0);
  CHECK(std::isinf(row.min_oa));
  CHECK(check_invariants(log).ok());
}

TEST_CASE("basing sends the robot home") {
  TrialConfig cfg;
  cfg.environment = corridor();
  cfg.basing = parse_basing("0");
  const TrialLog log = run_trial(cfg);
  CHECK(log.outcome == Outcome::GoalReached);
  CHECK(log.steps.back().goal_set == world::GoalSet::Homes);
  CHECK(log.steps.back().goal_cell == 0);
}

TEST_CASE("seeded trials keep the invariants") {
  TrialConfig cfg;
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 20; ++s) seeds.push_back(s);
  const auto logs = run_batch(seeds, cfg, 4);
  REQUIRE(logs.size() == 20);
  for (const auto& log : logs) {
    const auto rep = check_invariants(log);
    CHECK_MESSAGE(rep.ok(), "seed " << log.seed << ": " << (rep.ok() ? "" : rep.failures.front()));
    CHECK(log.outcome != Outcome::Violation);
    CHECK(log.outcome != Outcome::Aborted);
  }
}

TEST_CASE("logs export and round-trip") {
  TrialConfig cfg;
  cfg.seed = 11;
  cfg.duration = 15.0;
  const TrialLog log = run_trial(cfg);
  const std::string js = log_json(log);
  CHECK(log_json(parse_log_json(js)) == js);
  CHECK_THROWS_AS(parse_log_json("[1,2"), InputError);

  std::ostringstream csv;
  write_log_csv(csv, log);
  CHECK(csv.str().rfind("t,px,py,theta,v_nom,w_nom,v,w,sat,h,oa,p,goalset\n", 0) == 0);
  CHECK(count_lines(csv.str()) == static_cast<int>(log.steps.size()) + 1);
}

TEST_CASE("batch edge cases") {
  TrialConfig cfg;
  cfg.duration = 10.0;
  CHECK(run_batch({}, cfg, 4).empty());
  const auto logs = run_batch({7, 7, 2}, cfg, 3);
  REQUIRE(logs.size() == 3);
  CHECK(log_json(logs[0]) == log_json(logs[1]));
  CHECK(logs[2].seed == 2);

  std::vector<SummaryRow> rows;
  for (const auto& l : logs) rows.push_back(summarize(l));
  std::ostringstream out;
  write_summary_csv(out, rows);
  CHECK(count_lines(out.str()) == 4);
  std::ostringstream empty;
  write_summary_csv(empty, {});
  CHECK(count_lines(empty.str()) == 1);
  CHECK(summary_json({}) .find('[') != std::string::npos);
}

TEST_CASE("seed lists and basing schedules") {
  CHECK(parse_seed_list("0..3") == std::vector<std::uint64_t>{0, 1, 2, 3});
  CHECK(parse_seed_list("5,2,5") == std::vector<std::uint64_t>{5, 2, 5});
  CHECK(parse_seed_list("").empty());
  CHECK_THROWS_AS(parse_seed_list("3..1"), InputError);
  CHECK_THROWS_AS(parse_seed_list("a"), InputError);
  CHECK_THROWS_AS(parse_seed_list("1,,2"), InputError);

  const auto b = parse_basing("1.5,4");
  CHECK(b.toggle_times == std::vector<double>{1.5, 4.0});
  CHECK(parse_basing("").toggle_times.empty());
  CHECK_THROWS_AS(parse_basing("4,1.5"), InputError);
  CHECK_THROWS_AS(parse_basing("x"), InputError);
  CHECK_THROWS_AS(parse_basing("-1"), InputError);
}

TEST_CASE("invariant checker notices tampering") {
  TrialConfig cfg;
  cfg.seed = 1;
  cfg.duration = 5.0;
  TrialLog log = run_trial(cfg);
  REQUIRE(check_invariants(log).ok());
  TrialLog bad = log;
  bad.steps[3].oa = -0.01;
  CHECK_FALSE(check_invariants(bad).ok());
  bad = log;
  bad.replans[1].step += 1;
  CHECK_FALSE(check_invariants(bad).ok());
  bad = log;
  bad.replans[0].rho = -0.1;
  CHECK_FALSE(check_invariants(bad).ok());
  bad = log;
  for (auto& s : bad.steps) s.saturated = false;
  bad.steps[10].h = -0.5;
  CHECK_FALSE(check_invariants(bad).ok());
}
