#pragma once

#include "stlshield/dynamics.hpp"
#include "stlshield/environment.hpp"
#include "stlshield/planner.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stlshield::sim {

struct TrialConfig {
  std::uint64_t seed = 0;
  double duration = 60.0;
  double dt = 1.0 / 30.0;
  double replan_period = 0.25;
  double alpha_gain = 2.0;
  double lyapunov_gain = 2.0;
  world::BasingSchedule basing;
  Integrator integrator = Integrator::Rk4;
  world::PlannerConfig planner;
  double goal_tolerance = 0.2;
  /// Run in this environment instead of generating one from the seed.
  std::optional<world::Environment> environment;
};

/// Replans fire every ceil(replan_period / dt) steps, starting with step 0.
int replan_interval(const TrialConfig& cfg);

enum class Outcome { GoalReached, Timeout, Violation, Aborted };
std::string_view outcome_name(Outcome o);
Outcome parse_outcome(std::string_view s);

struct StepRecord {
  double t = 0.0;
  UnicycleState x;
  Eigen::Vector2d u_nom = Eigen::Vector2d::Zero();
  Eigen::Vector2d u = Eigen::Vector2d::Zero();
  bool saturated = false;
  double h = 0.0;  ///< NaN before the first successful plan
  double oa = 0.0;
  double p = 0.0;  ///< distance to the goal of the active plan, NaN without one
  world::GoalSet goal_set = world::GoalSet::Goals;
  int goal_cell = -1;
  std::vector<world::Point> moving;  ///< moving-obstacle positions
};

struct ReplanRecord {
  double t = 0.0;
  int step = 0;
  std::optional<double> rho;  ///< expert robustness; empty when planning failed
  world::GoalSet goal_set = world::GoalSet::Goals;
  bool parked = false;
  bool keeps_obligations = true;  ///< see world::expert_plan

  bool success() const { return rho.has_value(); }
};

struct TrialLog {
  std::uint64_t seed = 0;
  double dt = 0.0;
  int replan_interval = 0;
  std::vector<StepRecord> steps;
  std::vector<ReplanRecord> replans;
  Outcome outcome = Outcome::Timeout;
  std::string message;
};

TrialLog run_trial(const TrialConfig& cfg);

struct SummaryRow {
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::Timeout;
  int steps = 0;
  double t_end = 0.0;
  double min_oa = 0.0;
  double min_h = 0.0;
  double final_p = 0.0;
  int replans = 0;
  int plan_failures = 0;
  int saturated_steps = 0;
  double min_rho = 0.0;
};

SummaryRow summarize(const TrialLog& log);

/// Runs every seed with `base` (seed replaced) on up to `jobs` threads.
/// Results come back in seed order.
std::vector<TrialLog> run_batch(const std::vector<std::uint64_t>& seeds, const TrialConfig& base, int jobs = 1);

/// Column order: t,px,py,theta,v_nom,w_nom,v,w,sat,h,oa,p,goalset
void write_log_csv(std::ostream& out, const TrialLog& log);
std::string log_json(const TrialLog& log);
TrialLog parse_log_json(std::string_view text);

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
std::string summary_json(const std::vector<SummaryRow>& rows);

/// Post-hoc checks on a finished trial:
///  - h >= -1e-6 on steps with no saturation earlier in the same replan epoch
///  - OA > 0 on every step unless the trial ended in a violation
///  - every successful replan has rho >= 0
///  - replans happen exactly every replan_interval steps
///  - P does not increase across any 10 s stretch with an unchanged goal
struct InvariantReport {
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

InvariantReport check_invariants(const TrialLog& log);

/// Parses "0..19" (inclusive) or "3,5,8".
std::vector<std::uint64_t> parse_seed_list(std::string_view text);
/// Parses "t1,t2,..." into strictly increasing toggle times.
world::BasingSchedule parse_basing(std::string_view text);

}  // namespace stlshield::sim
