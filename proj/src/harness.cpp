#include "stlshield/harness.hpp"

#include "number_format.hpp"
#include "stlshield/barrier.hpp"
#include "stlshield/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

namespace stlshield::sim {

using world::GoalSet;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kProgressTolerance = 1e-9;

world::Point xy(const UnicycleState& x) { return {x.px, x.py}; }

stl::LipschitzCertificate reach_avoid_certificate() {
  return {1.0, 0.0, world::kLookahead, WeightMatrix(Vector{{1.0, 1.0, 0.0}})};
}

}  // namespace

int replan_interval(const TrialConfig& cfg) {
  return std::max(1, static_cast<int>(std::ceil(cfg.replan_period / cfg.dt - 1e-9)));
}

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::GoalReached: return "goal_reached";
    case Outcome::Timeout: return "timeout";
    case Outcome::Violation: return "violation";
    case Outcome::Aborted: return "aborted";
  }
  return "?";
}

Outcome parse_outcome(std::string_view s) {
  for (auto o : {Outcome::GoalReached, Outcome::Timeout, Outcome::Violation, Outcome::Aborted})
    if (outcome_name(o) == s) return o;
  throw InputError("unknown outcome '" + std::string(s) + "'");
}

TrialLog run_trial(const TrialConfig& cfg) {
  if (!(cfg.dt > 0.0) || !(cfg.duration > cfg.replan_period) || !(cfg.replan_period > 0.0))
    throw InputError("trial needs dt > 0 and duration > replan_period > 0");

  world::Environment env = cfg.environment ? *cfg.environment : world::generate_environment(cfg.seed);
  const ControlAffineSystem sys = unicycle_system();
  const auto cert = reach_avoid_certificate();
  const int every = replan_interval(cfg);
  const auto total = static_cast<long>(std::llround(cfg.duration / cfg.dt));

  TrialLog log;
  log.seed = cfg.seed;
  log.dt = cfg.dt;
  log.replan_interval = every;
  log.outcome = Outcome::Timeout;

  UnicycleState x = env.ego_init;
  std::optional<TimeVaryingBarrier> barrier;
  double t_plan = 0.0;
  double plan_horizon = 0.0;
  world::Point goal = world::Point::Zero();
  int goal_cell = -1;
  GoalSet goal_set = GoalSet::Goals;
  // P at each successful replan; the trajectory should not be farther from
  // that goal 10 s later.
  struct Promise {
    double t;
    double p;
    int goal_cell;
    GoalSet goal_set;
  };
  std::vector<Promise> promises;

  try {
    for (long k = 0; k < total; ++k) {
      const double t = static_cast<double>(k) * cfg.dt;
      if (k % every == 0) {
        const bool basing = cfg.basing.value_at(t);
        ReplanRecord rec;
        rec.t = t;
        rec.step = static_cast<int>(k);
        rec.goal_set = basing ? GoalSet::Homes : GoalSet::Goals;
        std::erase_if(promises, [t](const Promise& p) { return p.t + world::kLookahead <= t; });
        std::vector<world::ProgressBound> obligations;
        for (const auto& p : promises)
          if (p.goal_set == rec.goal_set) obligations.push_back({p.t + world::kLookahead - t, p.p, p.goal_cell});
        if (auto plan = world::expert_plan(env, x, basing, cfg.planner, obligations)) {
          rec.rho = plan->robustness;
          rec.parked = plan->parked;
          rec.keeps_obligations = plan->keeps_obligations;
          plan_horizon = plan->signal.horizon();
          promises.push_back({t, (xy(x) - plan->goal.center).norm(), plan->goal.goal_cell, plan->goal_set});
          barrier.emplace(synthesize(std::move(plan->signal), plan->tube_radius, cert));
          t_plan = t;
          goal = plan->goal.center;
          goal_cell = plan->goal.goal_cell;
          goal_set = plan->goal_set;
        }
        log.replans.push_back(rec);
      }

      StepRecord step;
      step.t = t;
      step.x = x;
      step.goal_set = goal_set;
      step.goal_cell = goal_cell;
      Vector u = Vector::Zero(2);
      if (barrier) {
        const double t_rel = std::min(t - t_plan, plan_horizon);
        const Vector xv = x.to_vector();
        const Vector u_nom =
            lyapunov_nominal(x, barrier->expert().at(t_rel), barrier->expert_velocity(t_rel), cfg.lyapunov_gain);
        const FilterResult fr = filter_input(*barrier, sys, xv, t_rel, u_nom, cfg.alpha_gain);
        u = fr.u;
        step.u_nom = u_nom;
        step.saturated = fr.saturated;
        step.h = barrier->value(xv, t_rel);
        step.p = (xy(x) - goal).norm();
      } else {
        step.h = kNaN;
        step.p = kNaN;
      }
      step.u = u;
      step.moving = env.moving_positions();
      step.oa = world::obstacle_margin(env, xy(x), step.moving);
      log.steps.push_back(step);

      if (step.oa <= 0.0) {
        log.outcome = Outcome::Violation;
        break;
      }
      const GoalSet wanted = cfg.basing.value_at(t) ? GoalSet::Homes : GoalSet::Goals;
      if (barrier && goal_set == wanted && step.p <= cfg.goal_tolerance && !cfg.basing.has_toggle_after(t)) {
        log.outcome = Outcome::GoalReached;
        break;
      }

      x = UnicycleState::from_vector(stlshield::step(sys, x.to_vector(), u, cfg.dt, cfg.integrator));
      world::advance_obstacles(env, cfg.dt, xy(x));
    }
  } catch (const NumericError& e) {
    log.outcome = Outcome::Aborted;
    log.message = e.what();
  }
  return log;
}

SummaryRow summarize(const TrialLog& log) {
  SummaryRow r;
  r.seed = log.seed;
  r.outcome = log.outcome;
  r.steps = static_cast<int>(log.steps.size());
  r.t_end = log.steps.empty() ? 0.0 : log.steps.back().t;
  r.min_oa = std::numeric_limits<double>::infinity();
  r.min_h = std::numeric_limits<double>::infinity();
  r.min_rho = std::numeric_limits<double>::infinity();
  for (const auto& s : log.steps) {
    r.min_oa = std::min(r.min_oa, s.oa);
    if (!std::isnan(s.h)) r.min_h = std::min(r.min_h, s.h);
    if (s.saturated) ++r.saturated_steps;
  }
  r.final_p = log.steps.empty() ? kNaN : log.steps.back().p;
  r.replans = static_cast<int>(log.replans.size());
  for (const auto& p : log.replans) {
    if (p.rho)
      r.min_rho = std::min(r.min_rho, *p.rho);
    else
      ++r.plan_failures;
  }
  return r;
}

std::vector<TrialLog> run_batch(const std::vector<std::uint64_t>& seeds, const TrialConfig& base, int jobs) {
  std::vector<TrialLog> logs(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      TrialConfig cfg = base;
      cfg.seed = seeds[i];
      cfg.environment.reset();
      logs[i] = run_trial(cfg);
    }
  };
  const auto n = static_cast<std::size_t>(std::clamp(jobs, 1, 256));
  std::vector<std::jthread> pool;
  for (std::size_t j = 1; j < std::min(n, seeds.size()); ++j) pool.emplace_back(worker);
  worker();
  return logs;
}

namespace {

using detail::format_number;

std::string num(double v) { return std::isnan(v) ? "nan" : format_number(v); }

nlohmann::ordered_json num_json(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

double json_num(const nlohmann::json& j) { return j.is_null() ? kNaN : j.get<double>(); }

GoalSet parse_set(const std::string& s) {
  if (s == "G") return GoalSet::Goals;
  if (s == "H") return GoalSet::Homes;
  throw InputError("goal set must be G or H");
}

}  // namespace

void write_log_csv(std::ostream& out, const TrialLog& log) {
  out << "t,px,py,theta,v_nom,w_nom,v,w,sat,h,oa,p,goalset\n";
  for (const auto& s : log.steps) {
    out << num(s.t) << ',' << num(s.x.px) << ',' << num(s.x.py) << ',' << num(s.x.theta) << ','
        << num(s.u_nom(0)) << ',' << num(s.u_nom(1)) << ',' << num(s.u(0)) << ',' << num(s.u(1)) << ','
        << (s.saturated ? 1 : 0) << ',' << num(s.h) << ',' << num(s.oa) << ',' << num(s.p) << ','
        << world::goal_set_code(s.goal_set) << '\n';
  }
}

std::string log_json(const TrialLog& log) {
  nlohmann::ordered_json j;
  j["seed"] = log.seed;
  j["dt"] = log.dt;
  j["replan_interval"] = log.replan_interval;
  j["outcome"] = outcome_name(log.outcome);
  j["message"] = log.message;
  auto replans = nlohmann::ordered_json::array();
  for (const auto& r : log.replans) {
    nlohmann::ordered_json o;
    o["t"] = r.t;
    o["step"] = r.step;
    o["rho"] = r.rho ? num_json(*r.rho) : nlohmann::ordered_json(nullptr);
    o["goalset"] = std::string(1, world::goal_set_code(r.goal_set));
    o["parked"] = r.parked;
    o["keeps_obligations"] = r.keeps_obligations;
    replans.push_back(std::move(o));
  }
  j["replans"] = std::move(replans);
  auto steps = nlohmann::ordered_json::array();
  for (const auto& s : log.steps) {
    nlohmann::ordered_json o;
    o["t"] = s.t;
    o["x"] = {s.x.px, s.x.py, s.x.theta};
    o["u_nom"] = {s.u_nom(0), s.u_nom(1)};
    o["u"] = {s.u(0), s.u(1)};
    o["sat"] = s.saturated;
    o["h"] = num_json(s.h);
    o["oa"] = num_json(s.oa);
    o["p"] = num_json(s.p);
    o["goalset"] = std::string(1, world::goal_set_code(s.goal_set));
    o["goal_cell"] = s.goal_cell;
    auto moving = nlohmann::ordered_json::array();
    for (const auto& m : s.moving) moving.push_back({m.x(), m.y()});
    o["moving"] = std::move(moving);
    steps.push_back(std::move(o));
  }
  j["steps"] = std::move(steps);
  return j.dump(2) + "\n";
}

TrialLog parse_log_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    TrialLog log;
    log.seed = j.at("seed").get<std::uint64_t>();
    log.dt = j.at("dt").get<double>();
    log.replan_interval = j.at("replan_interval").get<int>();
    log.outcome = parse_outcome(j.at("outcome").get<std::string>());
    log.message = j.at("message").get<std::string>();
    for (const auto& o : j.at("replans")) {
      ReplanRecord r;
      r.t = o.at("t").get<double>();
      r.step = o.at("step").get<int>();
      if (!o.at("rho").is_null()) r.rho = o.at("rho").get<double>();
      r.goal_set = parse_set(o.at("goalset").get<std::string>());
      r.parked = o.at("parked").get<bool>();
      r.keeps_obligations = o.at("keeps_obligations").get<bool>();
      log.replans.push_back(r);
    }
    for (const auto& o : j.at("steps")) {
      StepRecord s;
      s.t = o.at("t").get<double>();
      const auto x = o.at("x").get<std::vector<double>>();
      const auto un = o.at("u_nom").get<std::vector<double>>();
      const auto u = o.at("u").get<std::vector<double>>();
      if (x.size() != 3 || un.size() != 2 || u.size() != 2) throw InputError("trial log: bad vector length");
      s.x = {x[0], x[1], x[2]};
      s.u_nom = {un[0], un[1]};
      s.u = {u[0], u[1]};
      s.saturated = o.at("sat").get<bool>();
      s.h = json_num(o.at("h"));
      s.oa = json_num(o.at("oa"));
      s.p = json_num(o.at("p"));
      s.goal_set = parse_set(o.at("goalset").get<std::string>());
      s.goal_cell = o.at("goal_cell").get<int>();
      for (const auto& m : o.at("moving")) {
        const auto v = m.get<std::vector<double>>();
        if (v.size() != 2) throw InputError("trial log: bad obstacle position");
        s.moving.emplace_back(v[0], v[1]);
      }
      log.steps.push_back(s);
    }
    return log;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("trial log json: ") + e.what());
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "seed,outcome,steps,t_end,min_oa,min_h,final_p,replans,plan_failures,saturated_steps,min_rho\n";
  for (const auto& r : rows) {
    out << r.seed << ',' << outcome_name(r.outcome) << ',' << r.steps << ',' << num(r.t_end) << ','
        << num(r.min_oa) << ',' << num(r.min_h) << ',' << num(r.final_p) << ',' << r.replans << ','
        << r.plan_failures << ',' << r.saturated_steps << ',' << num(r.min_rho) << '\n';
  }
}

std::string summary_json(const std::vector<SummaryRow>& rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    o["seed"] = r.seed;
    o["outcome"] = outcome_name(r.outcome);
    o["steps"] = r.steps;
    o["t_end"] = r.t_end;
    o["min_oa"] = num_json(r.min_oa);
    o["min_h"] = num_json(r.min_h);
    o["final_p"] = num_json(r.final_p);
    o["replans"] = r.replans;
    o["plan_failures"] = r.plan_failures;
    o["saturated_steps"] = r.saturated_steps;
    o["min_rho"] = num_json(r.min_rho);
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

InvariantReport check_invariants(const TrialLog& log) {
  InvariantReport rep;
  auto fail = [&](std::string msg) {
    if (rep.failures.size() < 20) rep.failures.push_back(std::move(msg));
  };
  const int every = log.replan_interval;

  bool saturated_earlier = false;
  for (std::size_t k = 0; k < log.steps.size(); ++k) {
    const auto& s = log.steps[k];
    if (every > 0 && k % static_cast<std::size_t>(every) == 0) saturated_earlier = false;
    if (!saturated_earlier && !std::isnan(s.h) && s.h < -1e-6)
      fail("h = " + num(s.h) + " at t = " + num(s.t) + " without saturation");
    if (s.saturated) saturated_earlier = true;
    if (log.outcome != Outcome::Violation && !(s.oa > 0.0))
      fail("OA = " + num(s.oa) + " at t = " + num(s.t));
    if (k > 0 && !(s.t > log.steps[k - 1].t)) fail("timestamps not increasing at step " + std::to_string(k));
  }

  for (std::size_t i = 0; i < log.replans.size(); ++i) {
    const auto& r = log.replans[i];
    if (r.rho && !(*r.rho >= 0.0)) fail("replan at t = " + num(r.t) + " has rho = " + num(*r.rho));
    if (r.step != static_cast<int>(i) * every) fail("replan " + std::to_string(i) + " at step " + std::to_string(r.step));
  }
  const std::size_t expected = log.steps.empty() || every <= 0
                                   ? 0
                                   : (log.steps.size() - 1) / static_cast<std::size_t>(every) + 1;
  if (log.replans.size() != expected) fail("expected " + std::to_string(expected) + " replans");

  // Progress: from each successful replan, P 10 s later is no larger, as
  // long as the goal stays the same over the window.
  if (log.dt > 0.0) {
    const auto window = static_cast<std::size_t>(std::llround(world::kLookahead / log.dt));
    for (const auto& r : log.replans) {
      if (!r.success()) continue;
      const auto k0 = static_cast<std::size_t>(r.step);
      const std::size_t k1 = k0 + window;
      if (k1 >= log.steps.size()) continue;
      bool same_goal = true;
      for (std::size_t k = k0 + 1; k <= k1 && same_goal; ++k)
        same_goal = log.steps[k].goal_cell == log.steps[k0].goal_cell && log.steps[k].goal_set == log.steps[k0].goal_set;
      if (!same_goal) continue;
      const auto& a = log.steps[k0];
      const auto& b = log.steps[k1];
      if (b.p > a.p + kProgressTolerance)
        fail("P rose from " + num(a.p) + " to " + num(b.p) + " over [" + num(a.t) + ", " + num(b.t) + "]");
    }
  }
  return rep;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  auto parse_one = [](std::string_view s) {
    std::uint64_t v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size() || s.empty())
      throw InputError("bad seed '" + std::string(s) + "'");
    return v;
  };
  std::vector<std::uint64_t> out;
  if (text.empty()) return out;
  if (const auto dots = text.find(".."); dots != std::string_view::npos) {
    const auto lo = parse_one(text.substr(0, dots));
    const auto hi = parse_one(text.substr(dots + 2));
    if (hi < lo) throw InputError("seed range is empty");
    if (hi - lo > 10'000'000) throw InputError("seed range too large");
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = std::min(text.find(',', start), text.size());
    out.push_back(parse_one(text.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

world::BasingSchedule parse_basing(std::string_view text) {
  world::BasingSchedule b;
  std::size_t start = 0;
  while (!text.empty() && start <= text.size()) {
    const auto comma = std::min(text.find(',', start), text.size());
    const auto item = text.substr(start, comma - start);
    double v = 0.0;
    auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || end != item.data() + item.size() || item.empty() || !std::isfinite(v) || v < 0.0)
      throw InputError("bad basing time '" + std::string(item) + "'");
    if (!b.toggle_times.empty() && !(v > b.toggle_times.back()))
      throw InputError("basing toggle times must be strictly increasing");
    b.toggle_times.push_back(v);
    start = comma + 1;
  }
  return b;
}

}  // namespace stlshield::sim
