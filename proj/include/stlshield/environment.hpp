#pragma once

#include "stlshield/dynamics.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stlshield::world {

using Point = Eigen::Vector2d;

/// Workspace [-1.6, 1.6] x [-1, 1] split into 8 columns x 5 rows of 0.4 m
/// cells. Cells are indexed row-major from the bottom-left corner:
/// index = row * kCols + col.
inline constexpr int kCols = 8;
inline constexpr int kRows = 5;
inline constexpr int kCells = kCols * kRows;
inline constexpr double kCellSize = 0.4;
inline constexpr double kXMin = -1.6;
inline constexpr double kXMax = 1.6;
inline constexpr double kYMin = -1.0;
inline constexpr double kYMax = 1.0;

/// Clearances required by the obstacle-avoidance margin.
inline constexpr double kStaticClearance = 0.2;   // inf-norm to static centers
inline constexpr double kMovingClearance = 0.18;  // 2-norm to moving obstacles

Point cell_center(int cell);
/// Cell containing p; points on the outer boundary belong to the edge cells.
/// Throws DomainError outside the workspace.
int cell_of(const Point& p);
bool in_workspace(const Point& p);
/// 4-connected neighbours in the order right, up, left, down.
std::vector<int> neighbours(int cell);

enum class GoalSet { Goals, Homes };
char goal_set_code(GoalSet s);  // 'G' or 'H'

/// Scripted obstacle moving back and forth along a tour of adjacent free
/// cells at constant speed. It holds still while the ego is within
/// freeze_radius and resumes once the ego moves away.
struct MovingObstacle {
  std::vector<int> tour;
  double speed = 0.1;
  double freeze_radius = 0.2;
  double progress = 0.0;  ///< arc length travelled along the ping-pong path

  Point position() const;
  Point position_at(double arc_length) const;
  double tour_length() const;
};

struct Environment {
  std::uint64_t seed = 0;
  std::vector<int> static_obstacles;
  std::vector<MovingObstacle> moving;
  std::vector<int> goals;
  std::vector<int> homes;
  UnicycleState ego_init;
  double time = 0.0;

  bool is_static(int cell) const;
  std::vector<Point> static_centers() const;
  std::vector<Point> moving_positions() const;
  const std::vector<int>& goal_cells(GoalSet s) const { return s == GoalSet::Goals ? goals : homes; }
};

/// The four corner cells.
std::vector<int> corner_cells();

struct GenerationOptions {
  int static_count = 8;
  int moving_count = 4;
  int goal_count = 3;
  int tour_steps = 12;
  double moving_speed = 0.1;
  int max_rejections = 10000;
};

/// Rejection-samples an environment: distinct cells for static obstacles,
/// moving-obstacle starts, the ego start and the goals (none in a corner),
/// with at least one goal and one home reachable from the ego at t = 0.
/// Deterministic in the seed.
Environment generate_environment(std::uint64_t seed, const GenerationOptions& opts = {});

/// Stable JSON (2-space indent). Regenerating from the same seed reproduces
/// it byte for byte.
std::string environment_json(const Environment& env);
Environment parse_environment_json(std::string_view text);

struct GoalChoice {
  int goal_cell = -1;
  Point center = Point::Zero();
  int path_length = 0;    ///< cells traversed
  std::vector<int> path;  ///< start cell .. goal cell
};

/// Shortest 4-connected path (in cells) from the cell of `start` to the
/// closest cell of `targets`, avoiding static obstacles and `blocked`. The
/// start cell is always enterable. Ties go to the lowest cell index.
std::optional<GoalChoice> bfs_to_cells(const Environment& env, const Point& start,
                                       std::span<const int> targets, std::span<const int> blocked = {});

std::optional<GoalChoice> bfs_goal_choice(const Environment& env, const Point& start, GoalSet set,
                                          std::span<const int> blocked = {});

/// ||w - c|| where c is the goal picked by bfs_goal_choice from anchor.
/// Throws DomainError when no goal of the set is reachable from the anchor.
double path_distance(const Environment& env, const Point& w, const Point& anchor, GoalSet set);

/// min( min_o ||p - o||_inf - 0.2 over static centers,
///      min_i ||p - o_i||   - 0.18 over moving obstacles )
double obstacle_margin(const Environment& env, const Point& p);
double obstacle_margin(const Environment& env, const Point& p, std::span<const Point> moving);

/// Advances every moving obstacle by speed * dt unless the ego is within its
/// freeze radius, and advances env.time.
void advance_obstacles(Environment& env, double dt, const Point& ego);

/// Basing signal B(t): starts at `initial` and flips at each toggle time.
struct BasingSchedule {
  std::vector<double> toggle_times;
  bool initial = false;

  bool value_at(double t) const;
  bool has_toggle_after(double t) const;
};

}  // namespace stlshield::world
