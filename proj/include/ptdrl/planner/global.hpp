#pragma once

#include <vector>

#include "ptdrl/sim/map.hpp"

namespace ptdrl::planner {

struct GlobalPlannerConfig {
  double clearance = 0.45;         // hard inflation of the static map, m
  double min_clearance = 0.25;     // fallback floor when start or goal sits inside the hard inflation
  double soft_range = 1.0;         // cells closer than this to a wall cost extra, m
  double soft_weight = 1.0;
  double waypoint_spacing = 0.5;   // m
};

/// 8-connected A* on the inflated static map, decimated to waypoints spaced along
/// the path. The last waypoint is the goal itself; the start is not included.
/// Throws PlanningError when the goal is unreachable.
std::vector<Vec2> plan_global(const sim::StaticMap& map, Vec2 start, Vec2 goal, const GlobalPlannerConfig& cfg = {});

/// Total length of start followed by the waypoints.
double path_length(Vec2 start, const std::vector<Vec2>& waypoints);

}  // namespace ptdrl::planner
