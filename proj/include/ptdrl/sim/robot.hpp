#pragma once

#include <limits>
#include <span>
#include <vector>

#include "ptdrl/sim/map.hpp"

namespace ptdrl::sim {

class InvalidPoseError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

struct VelocityCmd {
  double linear = 0.0;   // m/s
  double angular = 0.0;  // rad/s
  bool operator==(const VelocityCmd&) const = default;
};

struct RobotState {
  Pose pose;
  VelocityCmd velocity;
};

struct RobotConfig {
  double radius = 0.25;           // footprint, m
  double obstacle_search = 5.0;   // max range of min_obstacle_distance, m
  double substep = 0.01;          // swept-motion check spacing, m
};

struct StepResult {
  RobotState state;
  bool collision = false;
};

/// Distance from the footprint boundary to the nearest occupied cell or agent disc; 0 in contact,
/// +inf when nothing lies within cfg.obstacle_search.
double min_obstacle_distance(const StaticMap& map, std::span<const Disc> agents, const Pose& pose,
                             const RobotConfig& cfg = {});

/// Unicycle integration with swept-footprint collision checking. A blocked motion
/// stops its translation at contact (the turn still completes) and raises the collision
/// flag; the stored velocity is the command.
StepResult step_robot(const StaticMap& map, std::span<const Disc> agents, const RobotState& state,
                      const VelocityCmd& cmd, double dt, const RobotConfig& cfg = {});

/// Ranges of `n_beams` beams evenly spaced over 2*pi starting at the heading.
std::vector<double> raycast_lidar(const StaticMap& map, std::span<const Disc> agents, const Pose& pose,
                                  int n_beams, double max_range);

/// Distance along a ray to a disc, or +inf.
double ray_disc_distance(Vec2 origin, Vec2 dir, const Disc& disc);

}  // namespace ptdrl::sim
