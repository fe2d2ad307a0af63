#pragma once

#include <limits>
#include <span>
#include <vector>

#include "ptdrl/planner/params.hpp"
#include "ptdrl/sim/costmap.hpp"
#include "ptdrl/sim/robot.hpp"

namespace ptdrl::planner {

struct DwaConfig {
  double acc_lim_x = 1.5;      // m/s^2
  double acc_lim_theta = 3.0;  // rad/s^2
  double control_dt = 0.1;     // window half-width is acc * control_dt
  double sim_time = 1.5;       // rollout horizon, s
  double sim_dt = 0.1;
  double lookahead = 2.0;      // active waypoint: first one at least this far away, m
  double robot_radius = 0.25;
  double footprint_padding = 0.1;  // absorbs costmap rasterization error (about one cell), m
};

struct Window {
  double v_min, v_max, w_min, w_max;
};

struct Trajectory {
  sim::VelocityCmd command;
  std::vector<Pose> poses;  // after each sim_dt step, start pose excluded
};

struct DwaResult {
  sim::VelocityCmd command;
  bool recovery = false;
  double score = 0.0;
};

/// Velocities reachable within one control period, clipped to the parameter limits.
/// When the current speed already exceeds a limit the window collapses onto that limit.
Window dynamic_window(const sim::VelocityCmd& current, const ParameterSet& params, const DwaConfig& cfg);

/// vx_samples x vtheta_samples commands, linear-major, each axis evenly spaced with both
/// ends included. A single linear sample takes the window's upper bound; a single angular
/// sample takes the value closest to zero.
std::vector<sim::VelocityCmd> sample_commands(const Window& window, const ParameterSet& params);

Trajectory rollout(const Pose& start, const sim::VelocityCmd& cmd, const DwaConfig& cfg);

/// Index of the active waypoint in `path`: the first one at least `lookahead` from p, else the last.
std::size_t active_waypoint(Vec2 p, std::span<const Vec2> path, double lookahead);

/// Distance from p to the polyline through `path`.
double distance_to_path(Vec2 p, std::span<const Vec2> path);

/// Max cell cost under the trajectory poses.
double max_trajectory_cost(const Trajectory& traj, const sim::Costmap& costmap);

/// True when any pose sits on a lethal cell or has clearance below `radius`. A robot
/// already closer than `radius` may move as long as it keeps its start clearance.
bool trajectory_lethal(const Trajectory& traj, const sim::Costmap& costmap, double radius,
                       double start_clearance = std::numeric_limits<double>::infinity());

/// -(pdist * dist(end, path) + gdist * dist(end, goal) + occdist * max cost).
double score_trajectory(const Trajectory& traj, const sim::Costmap& costmap, std::span<const Vec2> path, Vec2 goal,
                        const ParameterSet& params);

/// Best non-lethal sample by score, first sample winning ties. Falls back to rotating in
/// place towards the active waypoint when every sample is lethal. `path` holds the
/// remaining waypoints; throws PlanningError when it is empty.
DwaResult dwa_select(const sim::Costmap& costmap, const sim::RobotState& state, std::span<const Vec2> path,
                     const ParameterSet& params, const DwaConfig& cfg = {});

}  // namespace ptdrl::planner
