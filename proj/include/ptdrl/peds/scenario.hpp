#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ptdrl/peds/social_force.hpp"

namespace ptdrl::peds {

struct AgentSpec {
  Vec2 start;
  std::vector<Vec2> waypoints;
  std::optional<double> desired_speed;  // sampled uniform(0.6, 1.2) when absent
  double radius = 0.3;
};

struct RobotRoute {
  Pose start;
  Vec2 goal;
};

/// One world: map file, robot start/goal routes, pedestrian routes, optional force overrides.
struct Scenario {
  std::string name;
  std::filesystem::path map_path;
  std::vector<RobotRoute> robot_routes;
  std::vector<AgentSpec> agents;
  SocialForceParams social_force;
};

Scenario parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

/// Instantiates agents for one episode: sampled desired speeds, starting waypoint
/// rotated by the seed and a small start jitter kept clear of walls.
std::vector<Agent> spawn_agents(const Scenario& scenario, const sim::StaticMap& map, Rng& rng);

}  // namespace ptdrl::peds
