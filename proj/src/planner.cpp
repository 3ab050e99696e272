#include "stlshield/planner.hpp"

#include "stlshield/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stlshield::world {

namespace {

Point xy(const Vector& v) { return {v(0), v(1)}; }

}  // namespace

double spec_robustness(const Environment& env, const Signal& s, double t, bool basing,
                       const UnicycleState& x0) {
  if (s.dim() < 2) throw InputError("spec_robustness: signal needs at least (px, py)");
  const double t_end = t + kLookahead;
  if (t < s.t0() - 1e-9 * s.dt() || t_end > s.horizon() + 1e-9 * s.dt())
    throw DomainError("spec_robustness: signal does not cover [t, t + 10]");
  const GoalSet set = basing ? GoalSet::Homes : GoalSet::Goals;
  const Point anchor{x0.px, x0.py};
  const auto choice = bfs_goal_choice(env, anchor, set);
  if (!choice) throw DomainError(std::string("no reachable cell in goal set ") + goal_set_code(set));

  const double progress = (anchor - choice->center).norm() - (xy(s.at(t_end)) - choice->center).norm();

  const auto moving = env.moving_positions();
  double oa = std::min(obstacle_margin(env, xy(s.at(t)), moving), obstacle_margin(env, xy(s.at(t_end)), moving));
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double tk = s.time_at(k);
    if (tk < t || tk > t_end) continue;
    oa = std::min(oa, obstacle_margin(env, xy(s[k]), moving));
  }
  return std::min(progress, oa);
}

namespace {

struct Polyline {
  std::vector<Point> points;
  std::vector<double> arc;  // cumulative length at each point

  double length() const { return arc.back(); }

  std::size_t segment(double l) const {
    std::size_t i = 0;
    while (i + 2 < points.size() && l >= arc[i + 1]) ++i;
    return i;
  }

  Point at(double l) const {
    if (points.size() == 1) return points.front();
    const std::size_t i = segment(l);
    const double len = arc[i + 1] - arc[i];
    const double f = len > 0.0 ? std::clamp((l - arc[i]) / len, 0.0, 1.0) : 0.0;
    return (1.0 - f) * points[i] + f * points[i + 1];
  }

  Point direction(double l) const {
    const std::size_t i = segment(l);
    return (points[i + 1] - points[i]).normalized();
  }
};

Polyline route_polyline(const Point& start, const std::vector<int>& cells) {
  std::vector<Point> raw{start};
  if (cells.size() >= 2) {
    for (std::size_t k = 1; k < cells.size(); ++k) raw.push_back(cell_center(cells[k]));
  } else {
    raw.push_back(cell_center(cells.front()));
  }
  Polyline p;
  for (const auto& q : raw) {
    if (!p.points.empty() && (q - p.points.back()).norm() < 1e-9) continue;
    p.arc.push_back(p.points.empty() ? 0.0 : p.arc.back() + (q - p.points.back()).norm());
    p.points.push_back(q);
  }
  return p;
}

// Largest l in [0, l_max] with ||w(l) - c|| <= r, or a negative value when none.
double furthest_within(const Polyline& w, const Point& c, double r, double l_max) {
  if (r < 0.0) return -1.0;
  for (std::size_t i = w.points.size() - 1; i-- > 0;) {
    const double lo = w.arc[i];
    const double hi = std::min(w.arc[i + 1], l_max);
    if (hi < lo) continue;
    const Point u = (w.points[i + 1] - w.points[i]).normalized();
    const Point d = w.points[i] - c;
    const double b = u.dot(d);
    const double disc = b * b - (d.squaredNorm() - r * r);
    if (disc < 0.0) continue;
    const double tau_lo = -b - std::sqrt(disc);
    const double tau_hi = -b + std::sqrt(disc);
    const double a = std::max(tau_lo, 0.0);
    const double z = std::min(tau_hi, hi - lo);
    if (a <= z) return lo + z;
  }
  return -1.0;
}

Signal stationary(const UnicycleState& x, const PlannerConfig& cfg) {
  const auto n = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.dt));
  return Signal(0.0, cfg.dt, std::vector<Vector>(n + 1, x.to_vector()));
}

struct Rollout {
  Signal signal;
  bool moves = false;
};

// Arc length at which the route first comes closer than `clearance` (in OA
// terms) to an obstacle, with moving obstacles held where they are now.
double clear_length(const Environment& env, const Polyline& w, double clearance) {
  constexpr double ds = 0.005;
  const auto moving = env.moving_positions();
  const double start_margin = obstacle_margin(env, w.at(0.0), moving);
  for (double l = ds; l < w.length() + ds; l += ds) {
    const double m = obstacle_margin(env, w.at(std::min(l, w.length())), moving);
    // Moving away from an obstacle we already sit close to is always allowed.
    if (m < clearance && m < start_margin) return std::max(0.0, l - ds);
  }
  return w.length();
}

Rollout rollout(const Environment& env, const std::vector<int>& cells, const UnicycleState& x,
                const Point& goal, const PlannerConfig& cfg) {
  const Point start{x.px, x.py};
  const Polyline w = route_polyline(start, cells);
  if (w.points.size() < 2) return {stationary(x, cfg), false};
  const double clear_until = clear_length(env, w, cfg.stop_clearance);

  const Point first = w.direction(0.0);
  const double phi0 = std::atan2(first.y(), first.x());
  const double turn = std::abs(wrap_angle(phi0 - x.theta));
  const double dwell = turn > cfg.align_tolerance ? turn / cfg.turn_rate : 0.0;
  const double reach = std::max(0.0, cfg.horizon - dwell) * cfg.speed;
  const double target = (start - goal).norm() - cfg.min_progress;
  const double stop = furthest_within(w, goal, target, std::min({reach, w.length(), clear_until}));
  if (stop <= 1e-9) return {stationary(x, cfg), false};

  const auto n = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.dt));
  std::vector<Vector> samples;
  samples.reserve(n + 1);
  double theta = x.theta + wrap_angle(phi0 - x.theta);
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    const double l_raw = cfg.speed * (t - dwell);
    // The sample that first reaches `stop` still takes the heading of the leg it arrived on.
    const bool moving = l_raw > 0.0 && l_raw - cfg.speed * cfg.dt < stop;
    const double l = std::clamp(l_raw, 0.0, stop);
    const Point p = w.at(l);
    if (moving) {
      const Point d = w.direction(std::min(l, stop - 1e-12));
      theta += wrap_angle(std::atan2(d.y(), d.x()) - theta);
    }
    samples.push_back(Vector{{p.x(), p.y(), theta}});
  }
  return {Signal(0.0, cfg.dt, std::move(samples)), true};
}

double obligation_slack(const Signal& s, const Point& goal, int goal_cell,
                       std::span<const ProgressBound> obligations) {
  double slack = std::numeric_limits<double>::infinity();
  for (const auto& ob : obligations) {
    if (ob.goal_cell != goal_cell) continue;
    const double tau = std::clamp(ob.deadline, s.t0(), s.horizon());
    slack = std::min(slack, ob.bound - (xy(s.at(tau)) - goal).norm());
  }
  return slack;
}

}  // namespace

std::optional<ExpertPlan> expert_plan(const Environment& env, const UnicycleState& x_now, bool basing,
                                      const PlannerConfig& cfg, std::span<const ProgressBound> obligations) {
  if (!(cfg.dt > 0.0) || cfg.horizon < kLookahead || !(cfg.speed > 0.0) || !(cfg.turn_rate > 0.0))
    throw InputError("planner configuration out of range");
  const GoalSet set = basing ? GoalSet::Homes : GoalSet::Goals;
  const Point anchor{x_now.px, x_now.py};
  const auto choice = bfs_goal_choice(env, anchor, set);
  if (!choice) return std::nullopt;

  std::optional<ExpertPlan> fallback;
  int attempts = 0;
  // Returns true when the candidate is accepted outright.
  auto consider = [&](Signal sig, bool parked) {
    ++attempts;
    const double rho = spec_robustness(env, sig, 0.0, basing, x_now);
    if (!(rho >= 0.0)) return false;
    const double slack = obligation_slack(sig, choice->center, choice->goal_cell, obligations);
    if (slack >= 0.0) {
      fallback = ExpertPlan{std::move(sig), rho, rho, *choice, set, attempts, parked, true};
      return true;
    }
    if (!fallback) fallback = ExpertPlan{std::move(sig), rho, rho, *choice, set, attempts, parked, false};
    return false;
  };

  const int start_cell = cell_of(anchor);
  const auto moving = env.moving_positions();
  for (int r = 0; r <= cfg.retries; ++r) {
    const double clearance = kMovingClearance + cfg.block_margin + r * cfg.margin_step;
    std::vector<int> blocked;
    for (int c = 0; c < kCells; ++c) {
      if (c == start_cell || c == choice->goal_cell) continue;
      for (const auto& o : moving)
        if ((cell_center(c) - o).norm() < clearance) {
          blocked.push_back(c);
          break;
        }
    }
    const int goal_cell = choice->goal_cell;
    const auto route = bfs_to_cells(env, anchor, std::span<const int>(&goal_cell, 1), blocked);
    if (!route) break;
    auto ro = rollout(env, route->path, x_now, choice->center, cfg);
    if (consider(std::move(ro.signal), !ro.moves)) break;
  }
  if (!fallback || !fallback->keeps_obligations) consider(stationary(x_now, cfg), true);
  if (fallback) fallback->attempts = attempts;
  return fallback;
}

}  // namespace stlshield::world
