#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ptdrl/sim/map.hpp"

namespace ptdrl::sim {

inline constexpr std::uint8_t kLethalCost = 254;
inline constexpr std::uint8_t kMaxInflatedCost = 253;

struct CostmapConfig {
  int side = 64;
  double resolution = 0.075;
  double decay = 6.0;          // 1/m
  double robot_radius = 0.25;  // m
};

/// Robot-centred, map-axis-aligned cost grid. The centre is the robot position
/// snapped to the cell lattice, so a world point keeps its cell as the window
/// rolls. Row-major with iy = 0 at the bottom (smallest y). `clearance` holds the distance from each cell centre
/// to the nearest lethal cell centre.
struct Costmap {
  int side = 0;
  double resolution = 0.0;
  Pose center;
  std::vector<std::uint8_t> cost;
  std::vector<double> clearance;

  std::uint8_t at(int ix, int iy) const { return cost[static_cast<std::size_t>(iy * side + ix)]; }
  double half_extent() const { return 0.5 * side * resolution; }
  Vec2 cell_center(int ix, int iy) const;
  /// Cell containing the world point, or false when outside the window.
  bool cell_of(Vec2 p, int& ix, int& iy) const;
  /// Cost at a world point; 0 outside the window.
  std::uint8_t cost_at(Vec2 p) const;
  /// Clearance at a world point; +inf outside the window.
  double clearance_at(Vec2 p) const;
  /// Costs scaled to [0, 1] by 1/254.
  std::vector<double> normalized() const;
};

/// Inflation cost for a free cell at `dist` metres from the nearest lethal cell.
std::uint8_t inflation_cost(double dist, double inflation_radius, const CostmapConfig& cfg);

Costmap build_local_costmap(const StaticMap& map, std::span<const Disc> agents, const Pose& pose,
                            double inflation_radius, const CostmapConfig& cfg = {});

/// Exact squared Euclidean distance transform (in cells^2) of a binary grid;
/// zero on set cells.
std::vector<double> squared_distance_transform(std::span<const std::uint8_t> mask, int width, int height);

}  // namespace ptdrl::sim
