#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ptdrl/sim/map.hpp"

namespace ptdrl::peds {

/// Helbing-Molnar constants. All strictly positive.
struct SocialForceParams {
  double relaxation_time = 0.5;     // tau, s
  double repulsion_strength = 2.1;  // A
  double repulsion_range = 0.35;    // B, m
  double wall_strength = 10.0;      // A_w
  double wall_range = 0.2;          // B_w, m

  double wall_search = 2.0;         // walls farther than this exert no force, m
  int wall_sectors = 8;             // one nearest wall point per angular sector
  double speed_cap_factor = 1.3;
  double waypoint_tolerance = 0.3;  // m

  void validate() const;
};

struct Agent {
  Vec2 position;
  Vec2 velocity;
  std::vector<Vec2> waypoints;  // looping route
  std::size_t next_waypoint = 0;
  double desired_speed = 1.0;
  double radius = 0.3;

  Vec2 goal() const { return waypoints.empty() ? position : waypoints[next_waypoint]; }
  sim::Disc disc() const { return {position, radius}; }
};

/// Total force on agents[index]: goal-driving term, exponential repulsion from the
/// other agents and the robot disc, and from the nearest wall point per sector.
/// Coincident discs push along a direction drawn from `rng`.
Vec2 social_force(std::span<const Agent> agents, std::size_t index, const std::optional<sim::Disc>& robot,
                  const sim::StaticMap& map, const SocialForceParams& params, Rng& rng);

/// Semi-implicit Euler update of all agents (forces evaluated on the pre-step state),
/// speed cap, wall clipping, hard disc separation, waypoint advancement.
void step_agents(std::vector<Agent>& agents, const std::optional<sim::Disc>& robot, const sim::StaticMap& map,
                 const SocialForceParams& params, double dt, Rng& rng);

std::vector<sim::Disc> discs(std::span<const Agent> agents);

}  // namespace ptdrl::peds
