#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls into the evaluation code it checks.

#include "stlshield/environment.hpp"
#include "stlshield/formula.hpp"
#include "stlshield/random.hpp"
#include "stlshield/signal.hpp"

#include <string>
#include <vector>

namespace oracle {

using stlshield::Rng;
using stlshield::Signal;
using stlshield::Vector;
using stlshield::stl::Formula;

/// Direct recursive robustness at sample i, straight from the definitions.
/// Interval bounds must be multiples of dt and every window must fit inside
/// the signal.
double robustness(const Formula& f, const Signal& s, long i);
bool satisfied(const Formula& f, const Signal& s, long i);

/// How far past t the formula looks (sum of nested upper bounds).
double lookahead(const Formula& f);

struct FormulaOptions {
  int max_depth = 3;
  Eigen::Index dim = 1;
  double dt = 0.1;
  int max_steps = 6;  ///< interval bounds are k * dt with k <= max_steps
  /// Restrict Until to TRUE on the left or a = 0, where the quantitative and
  /// Boolean until semantics agree in sign.
  bool sign_safe_until = true;
  bool allow_custom = true;
};

Formula random_formula(Rng& rng, const FormulaOptions& opts);

/// Smooth-ish random walk in [-3, 3]^dim.
Signal random_signal(Rng& rng, Eigen::Index dim, std::size_t samples, double dt, double t0 = 0.0);

/// Exhaustive max of ||s_k||_Q over samples k in [a, b] plus interpolated endpoints.
double window_max(const Signal& s, double a, double b, const Vector& q);

/// Shortest 4-connected path length (in steps) by Dijkstra with unit weights
/// over a hand-built adjacency, or -1 when unreachable.
int dijkstra(const stlshield::world::Environment& env, int start, int goal, const std::vector<int>& blocked = {});

/// Checks the generation conditions from scratch. Returns the problems found.
std::vector<std::string> check_environment(const stlshield::world::Environment& env);

/// Reach-avoid clauses checked one by one on a pose signal over [0, 10]:
/// the end point is no farther from the goal (chosen by Dijkstra from x0's
/// cell) than x0, and every sample keeps clear of static and current moving
/// obstacles.
struct ReachAvoidClauses {
  bool progress = false;
  bool clear = false;
};
ReachAvoidClauses reach_avoid_clauses(const stlshield::world::Environment& env, const Signal& s, bool basing,
                                      double x0, double y0);

}  // namespace oracle
