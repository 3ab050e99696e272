#include "stlshield/environment.hpp"

#include "stlshield/errors.hpp"
#include "stlshield/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <sstream>

namespace stlshield::world {

Point cell_center(int cell) {
  if (cell < 0 || cell >= kCells) throw DomainError("cell index " + std::to_string(cell) + " out of range");
  const int col = cell % kCols;
  const int row = cell / kCols;
  return {kXMin + kCellSize * (col + 0.5), kYMin + kCellSize * (row + 0.5)};
}

bool in_workspace(const Point& p) {
  constexpr double tol = 1e-12;
  return p.x() >= kXMin - tol && p.x() <= kXMax + tol && p.y() >= kYMin - tol && p.y() <= kYMax + tol;
}

int cell_of(const Point& p) {
  if (!in_workspace(p)) {
    std::ostringstream os;
    os << "point (" << p.x() << ", " << p.y() << ") is outside the workspace";
    throw DomainError(os.str());
  }
  const int col = std::clamp(static_cast<int>(std::floor((p.x() - kXMin) / kCellSize)), 0, kCols - 1);
  const int row = std::clamp(static_cast<int>(std::floor((p.y() - kYMin) / kCellSize)), 0, kRows - 1);
  return row * kCols + col;
}

std::vector<int> neighbours(int cell) {
  const int col = cell % kCols;
  const int row = cell / kCols;
  std::vector<int> out;
  if (col + 1 < kCols) out.push_back(cell + 1);
  if (row + 1 < kRows) out.push_back(cell + kCols);
  if (col > 0) out.push_back(cell - 1);
  if (row > 0) out.push_back(cell - kCols);
  return out;
}

char goal_set_code(GoalSet s) { return s == GoalSet::Goals ? 'G' : 'H'; }

std::vector<int> corner_cells() { return {0, kCols - 1, (kRows - 1) * kCols, kCells - 1}; }

double MovingObstacle::tour_length() const {
  return tour.size() < 2 ? 0.0 : kCellSize * static_cast<double>(tour.size() - 1);
}

Point MovingObstacle::position_at(double arc_length) const {
  if (tour.empty()) throw DomainError("moving obstacle has an empty tour");
  const double len = tour_length();
  if (len == 0.0) return cell_center(tour.front());
  double s = std::fmod(std::max(arc_length, 0.0), 2.0 * len);
  if (s > len) s = 2.0 * len - s;
  const auto seg = std::min(static_cast<std::size_t>(s / kCellSize), tour.size() - 2);
  const double frac = s / kCellSize - static_cast<double>(seg);
  return (1.0 - frac) * cell_center(tour[seg]) + frac * cell_center(tour[seg + 1]);
}

Point MovingObstacle::position() const { return position_at(progress); }

bool Environment::is_static(int cell) const {
  return std::find(static_obstacles.begin(), static_obstacles.end(), cell) != static_obstacles.end();
}

std::vector<Point> Environment::static_centers() const {
  std::vector<Point> out;
  out.reserve(static_obstacles.size());
  for (int c : static_obstacles) out.push_back(cell_center(c));
  return out;
}

std::vector<Point> Environment::moving_positions() const {
  std::vector<Point> out;
  out.reserve(moving.size());
  for (const auto& m : moving) out.push_back(m.position());
  return out;
}

namespace {

struct BfsTree {
  std::vector<int> dist;
  std::vector<int> parent;
};

BfsTree bfs(const Environment& env, int start, std::span<const int> blocked) {
  std::vector<char> closed(kCells, 0);
  for (int c : env.static_obstacles) closed[static_cast<std::size_t>(c)] = 1;
  for (int c : blocked)
    if (c >= 0 && c < kCells) closed[static_cast<std::size_t>(c)] = 1;
  closed[static_cast<std::size_t>(start)] = 0;

  BfsTree tree{std::vector<int>(kCells, -1), std::vector<int>(kCells, -1)};
  std::deque<int> queue{start};
  tree.dist[static_cast<std::size_t>(start)] = 0;
  while (!queue.empty()) {
    const int cur = queue.front();
    queue.pop_front();
    for (int nb : neighbours(cur)) {
      const auto k = static_cast<std::size_t>(nb);
      if (closed[k] || tree.dist[k] >= 0) continue;
      tree.dist[k] = tree.dist[static_cast<std::size_t>(cur)] + 1;
      tree.parent[k] = cur;
      queue.push_back(nb);
    }
  }
  return tree;
}

}  // namespace

std::optional<GoalChoice> bfs_to_cells(const Environment& env, const Point& start,
                                       std::span<const int> targets, std::span<const int> blocked) {
  const int s = cell_of(start);
  const BfsTree tree = bfs(env, s, blocked);
  int best = -1;
  for (int c : targets) {
    if (c < 0 || c >= kCells) continue;
    const int d = tree.dist[static_cast<std::size_t>(c)];
    if (d < 0) continue;
    const int bd = best < 0 ? -1 : tree.dist[static_cast<std::size_t>(best)];
    if (best < 0 || d < bd || (d == bd && c < best)) best = c;
  }
  if (best < 0) return std::nullopt;
  GoalChoice out;
  out.goal_cell = best;
  out.center = cell_center(best);
  out.path_length = tree.dist[static_cast<std::size_t>(best)];
  for (int c = best; c >= 0; c = tree.parent[static_cast<std::size_t>(c)]) out.path.push_back(c);
  std::reverse(out.path.begin(), out.path.end());
  return out;
}

std::optional<GoalChoice> bfs_goal_choice(const Environment& env, const Point& start, GoalSet set,
                                          std::span<const int> blocked) {
  return bfs_to_cells(env, start, env.goal_cells(set), blocked);
}

double path_distance(const Environment& env, const Point& w, const Point& anchor, GoalSet set) {
  const auto choice = bfs_goal_choice(env, anchor, set);
  if (!choice)
    throw DomainError(std::string("no reachable cell in goal set ") + goal_set_code(set));
  return (w - choice->center).norm();
}

double obstacle_margin(const Environment& env, const Point& p, std::span<const Point> moving) {
  double m = std::numeric_limits<double>::infinity();
  for (int c : env.static_obstacles)
    m = std::min(m, (p - cell_center(c)).lpNorm<Eigen::Infinity>() - kStaticClearance);
  for (const auto& o : moving) m = std::min(m, (p - o).norm() - kMovingClearance);
  return m;
}

double obstacle_margin(const Environment& env, const Point& p) {
  const auto moving = env.moving_positions();
  return obstacle_margin(env, p, moving);
}

void advance_obstacles(Environment& env, double dt, const Point& ego) {
  if (!(dt > 0.0)) throw InputError("advance_obstacles: dt must be positive");
  for (auto& m : env.moving) {
    if ((m.position() - ego).norm() <= m.freeze_radius) continue;
    m.progress += m.speed * dt;
  }
  env.time += dt;
}

bool BasingSchedule::value_at(double t) const {
  bool v = initial;
  for (double s : toggle_times)
    if (s <= t + 1e-12) v = !v;
  return v;
}

bool BasingSchedule::has_toggle_after(double t) const {
  return std::any_of(toggle_times.begin(), toggle_times.end(), [t](double s) { return s > t + 1e-12; });
}

namespace {

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

bool reaches_any(const Environment& env, int start, const std::vector<int>& targets) {
  const BfsTree tree = bfs(env, start, {});
  return std::any_of(targets.begin(), targets.end(),
                     [&](int c) { return tree.dist[static_cast<std::size_t>(c)] >= 0; });
}

std::optional<std::vector<int>> random_tour(const Environment& env, int start, int steps, Rng& rng) {
  std::vector<int> tour{start};
  for (int k = 0; k < steps; ++k) {
    std::vector<int> options;
    for (int nb : neighbours(tour.back()))
      if (!env.is_static(nb)) options.push_back(nb);
    if (options.empty()) return std::nullopt;
    if (tour.size() >= 2 && options.size() > 1)
      std::erase(options, tour[tour.size() - 2]);
    tour.push_back(options[rng.below(options.size())]);
  }
  return tour;
}

}  // namespace

Environment generate_environment(std::uint64_t seed, const GenerationOptions& opts) {
  Rng rng(seed);
  const auto corners = corner_cells();
  std::vector<int> pool;
  for (int c = 0; c < kCells; ++c)
    if (std::find(corners.begin(), corners.end(), c) == corners.end()) pool.push_back(c);
  const auto needed = static_cast<std::size_t>(opts.static_count + opts.moving_count + 1 + opts.goal_count);
  if (needed > pool.size()) throw InputError("environment options need more cells than the grid has");

  for (int attempt = 0; attempt < opts.max_rejections; ++attempt) {
    shuffle(pool, rng);
    Environment env;
    env.seed = seed;
    env.homes = corners;
    auto it = pool.begin();
    env.static_obstacles.assign(it, it + opts.static_count);
    it += opts.static_count;
    const std::vector<int> moving_starts(it, it + opts.moving_count);
    it += opts.moving_count;
    const int ego_cell = *it++;
    env.goals.assign(it, it + opts.goal_count);

    if (!reaches_any(env, ego_cell, env.goals) || !reaches_any(env, ego_cell, env.homes)) continue;

    bool ok = true;
    for (int start : moving_starts) {
      auto tour = random_tour(env, start, opts.tour_steps, rng);
      if (!tour) {
        ok = false;
        break;
      }
      MovingObstacle m;
      m.tour = std::move(*tour);
      m.speed = opts.moving_speed;
      env.moving.push_back(std::move(m));
    }
    if (!ok) continue;

    const Point p = cell_center(ego_cell);
    env.ego_init = {p.x(), p.y(), wrap_angle(rng.uniform(-std::numbers::pi, std::numbers::pi))};
    return env;
  }
  throw DomainError("environment generation exceeded " + std::to_string(opts.max_rejections) +
                    " rejections for seed " + std::to_string(seed));
}

std::string environment_json(const Environment& env) {
  nlohmann::ordered_json j;
  j["seed"] = env.seed;
  j["workspace"] = {kXMin, kXMax, kYMin, kYMax};
  j["grid"] = {{"cols", kCols}, {"rows", kRows}, {"cell_size", kCellSize}};
  j["static_obstacles"] = env.static_obstacles;
  j["goals"] = env.goals;
  j["homes"] = env.homes;
  j["ego_init"] = {{"px", env.ego_init.px}, {"py", env.ego_init.py}, {"theta", env.ego_init.theta}};
  auto moving = nlohmann::ordered_json::array();
  for (const auto& m : env.moving) {
    nlohmann::ordered_json o;
    o["tour"] = m.tour;
    o["speed"] = m.speed;
    o["freeze_radius"] = m.freeze_radius;
    moving.push_back(std::move(o));
  }
  j["moving_obstacles"] = std::move(moving);
  return j.dump(2) + "\n";
}

Environment parse_environment_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    Environment env;
    env.seed = j.at("seed").get<std::uint64_t>();
    env.static_obstacles = j.at("static_obstacles").get<std::vector<int>>();
    env.goals = j.at("goals").get<std::vector<int>>();
    env.homes = j.at("homes").get<std::vector<int>>();
    const auto& ego = j.at("ego_init");
    env.ego_init = {ego.at("px").get<double>(), ego.at("py").get<double>(), ego.at("theta").get<double>()};
    for (const auto& o : j.at("moving_obstacles")) {
      MovingObstacle m;
      m.tour = o.at("tour").get<std::vector<int>>();
      m.speed = o.at("speed").get<double>();
      m.freeze_radius = o.at("freeze_radius").get<double>();
      if (m.tour.empty() || !(m.speed > 0.0)) throw InputError("moving obstacle needs a tour and speed > 0");
      for (std::size_t k = 0; k + 1 < m.tour.size(); ++k) {
        const auto nb = neighbours(m.tour[k]);
        if (std::find(nb.begin(), nb.end(), m.tour[k + 1]) == nb.end())
          throw InputError("moving obstacle tour steps must be between adjacent cells");
      }
      env.moving.push_back(std::move(m));
    }
    auto check = [](int c) {
      if (c < 0 || c >= kCells) throw InputError("cell index " + std::to_string(c) + " out of range");
    };
    for (int c : env.static_obstacles) check(c);
    for (int c : env.goals) check(c);
    for (int c : env.homes) check(c);
    return env;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("environment json: ") + e.what());
  }
}

}  // namespace stlshield::world
