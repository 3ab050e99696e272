#pragma once

#include "stlshield/environment.hpp"
#include "stlshield/signal.hpp"

#include <optional>
#include <span>

namespace stlshield::world {

inline constexpr double kLookahead = 10.0;

/// Robustness of the reach-avoid specification
///   psi = (B | psi_G) & (!B | psi_H)
/// on a pose signal s (px, py, theta):
///   Phi(s, t, set) = min( P(x0) - P(s(t + 10)),
///                         min_{t' in [t, t+10]} OA(s(t'), obstacles frozen now) )
/// with P the path distance for `set` anchored at x0, and set = H when
/// basing is true, G otherwise. Requires s to cover [t, t + 10].
double spec_robustness(const Environment& env, const Signal& s, double t, bool basing,
                       const UnicycleState& x0);

struct PlannerConfig {
  double horizon = kLookahead;
  double dt = 1.0 / 30.0;
  double speed = 0.2;            ///< single-integrator cruise speed
  double block_margin = 0.15;    ///< extra clearance around moving obstacles when routing
  double margin_step = 0.1;      ///< inflation per retry
  int retries = 3;
  double turn_rate = 0.7853981633974483;  ///< plant heading rate used for the initial dwell
  double align_tolerance = 0.1;  ///< heading error (rad) below which no dwell is planned
  double min_progress = 0.05;    ///< required decrease of P before the expert moves at all
  double stop_clearance = 0.05;  ///< the rollout halts before OA drops below this
};

struct ExpertPlan {
  Signal signal;  ///< (px, py, theta) samples on [0, horizon]
  double robustness = 0.0;
  /// Radius for the barrier tube: robustness, shrunk so that staying inside
  /// the tube also keeps the progress obligations.
  double tube_radius = 0.0;
  GoalChoice goal;
  GoalSet goal_set = GoalSet::Goals;
  int attempts = 0;
  bool parked = false;  ///< stationary fallback plan
  bool keeps_obligations = true;
};

/// Progress promised by an earlier replan: P(s(deadline)) <= bound, with the
/// deadline relative to the start of the new plan. Only binds plans heading
/// to the same goal cell.
struct ProgressBound {
  double deadline = 0.0;
  double bound = 0.0;
  int goal_cell = -1;
};

/// Single-integrator expert: route along cell centers toward the goal picked
/// by P (moving obstacles block nearby cells), roll it out at cruise speed
/// after a dwell that lets the plant turn onto the first leg, lift to a pose
/// signal with heading atan2 of the velocity, and keep the plan only if its
/// robustness is non-negative. Retries with inflated blocking margins, then
/// falls back to parking in place. Returns nullopt when nothing satisfies the
/// specification, e.g. when no goal of the active set is reachable.
///
/// Plans that also keep every obligation are preferred. When none does, the
/// first plan satisfying the specification is returned with
/// keeps_obligations = false.
std::optional<ExpertPlan> expert_plan(const Environment& env, const UnicycleState& x_now, bool basing,
                                      const PlannerConfig& cfg = {},
                                      std::span<const ProgressBound> obligations = {});

}  // namespace stlshield::world
