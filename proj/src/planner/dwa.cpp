#include "ptdrl/planner/dwa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ptdrl::planner {

namespace {

void clip_range(double current, double acc, double dt, double lo_lim, double hi_lim, double& lo, double& hi) {
  lo = std::max(lo_lim, current - acc * dt);
  hi = std::min(hi_lim, current + acc * dt);
  if (lo > hi) lo = hi = current > hi_lim ? hi_lim : lo_lim;
}

std::vector<double> spaced(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = n == 1 ? hi : lo + (hi - lo) * i / (n - 1);
  return out;
}

}  // namespace

Window dynamic_window(const sim::VelocityCmd& current, const ParameterSet& params, const DwaConfig& cfg) {
  Window w{};
  clip_range(current.linear, cfg.acc_lim_x, cfg.control_dt, 0.0, params.max_vel_x, w.v_min, w.v_max);
  clip_range(current.angular, cfg.acc_lim_theta, cfg.control_dt, -params.max_vel_theta, params.max_vel_theta, w.w_min,
             w.w_max);
  return w;
}

std::vector<sim::VelocityCmd> sample_commands(const Window& window, const ParameterSet& params) {
  const auto vs = spaced(window.v_min, window.v_max, params.vx_samples);
  std::vector<double> ws;
  if (params.vtheta_samples == 1) {
    ws = {std::clamp(0.0, window.w_min, window.w_max)};
  } else {
    ws = spaced(window.w_min, window.w_max, params.vtheta_samples);
  }
  std::vector<sim::VelocityCmd> out;
  out.reserve(vs.size() * ws.size());
  for (double v : vs)
    for (double w : ws) out.push_back({v, w});
  return out;
}

Trajectory rollout(const Pose& start, const sim::VelocityCmd& cmd, const DwaConfig& cfg) {
  Trajectory t{cmd, {}};
  const int steps = static_cast<int>(std::lround(cfg.sim_time / cfg.sim_dt));
  t.poses.reserve(static_cast<std::size_t>(steps));
  Pose p = start;
  for (int i = 0; i < steps; ++i) {
    p.x += cmd.linear * std::cos(p.heading) * cfg.sim_dt;
    p.y += cmd.linear * std::sin(p.heading) * cfg.sim_dt;
    p.heading = normalize_angle(p.heading + cmd.angular * cfg.sim_dt);
    t.poses.push_back(p);
  }
  return t;
}

std::size_t active_waypoint(Vec2 p, std::span<const Vec2> path, double lookahead) {
  for (std::size_t i = 0; i < path.size(); ++i) {
    if ((path[i] - p).norm() >= lookahead) return i;
  }
  return path.size() - 1;
}

double distance_to_path(Vec2 p, std::span<const Vec2> path) {
  double best = (p - path[0]).norm();
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Vec2 a = path[i - 1], ab = path[i] - a;
    const double len2 = ab.dot(ab);
    const double u = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (p - (a + ab * u)).norm());
  }
  return best;
}

double max_trajectory_cost(const Trajectory& traj, const sim::Costmap& costmap) {
  double m = 0.0;
  for (const auto& p : traj.poses) m = std::max(m, static_cast<double>(costmap.cost_at(p.position())));
  return m;
}

bool trajectory_lethal(const Trajectory& traj, const sim::Costmap& costmap, double radius, double start_clearance) {
  const double floor = std::min(radius, start_clearance);
  for (const auto& p : traj.poses) {
    if (costmap.cost_at(p.position()) == sim::kLethalCost || costmap.clearance_at(p.position()) < floor) return true;
  }
  return false;
}

double score_trajectory(const Trajectory& traj, const sim::Costmap& costmap, std::span<const Vec2> path, Vec2 goal,
                        const ParameterSet& params) {
  const Vec2 end = traj.poses.back().position();
  return -(params.path_distance_bias * distance_to_path(end, path) + params.goal_distance_bias * (end - goal).norm() +
           params.occdist_scale * max_trajectory_cost(traj, costmap));
}

DwaResult dwa_select(const sim::Costmap& costmap, const sim::RobotState& state, std::span<const Vec2> path,
                     const ParameterSet& params, const DwaConfig& cfg) {
  if (path.empty()) throw PlanningError("dwa_select: no waypoints");
  const Vec2 goal = path[active_waypoint(state.pose.position(), path, cfg.lookahead)];
  const auto window = dynamic_window(state.velocity, params, cfg);

  const double start_clearance = costmap.clearance_at(state.pose.position());
  DwaResult best{{}, true, -std::numeric_limits<double>::infinity()};
  for (const auto& cmd : sample_commands(window, params)) {
    const auto traj = rollout(state.pose, cmd, cfg);
    if (trajectory_lethal(traj, costmap, cfg.robot_radius + cfg.footprint_padding, start_clearance)) continue;
    const double s = score_trajectory(traj, costmap, path, goal, params);
    if (s > best.score) best = {cmd, false, s};
  }
  if (best.recovery) {
    const Vec2 d = goal - state.pose.position();
    const double bearing = normalize_angle(std::atan2(d.y, d.x) - state.pose.heading);
    best.command = {0.0, bearing < 0 ? -params.max_vel_theta : params.max_vel_theta};
  }
  return best;
}

}  // namespace ptdrl::planner
