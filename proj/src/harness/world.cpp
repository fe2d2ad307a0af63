#include "ptdrl/harness/world.hpp"

namespace ptdrl::harness {

World load_world(const std::filesystem::path& scenario_path) {
  World w;
  w.scenario = peds::load_scenario(scenario_path);
  w.map = sim::load_map(w.scenario.map_path);
  for (const auto& r : w.scenario.robot_routes) {
    if (w.map.occupied_at(r.start.position()) || w.map.occupied_at(r.goal)) {
      throw ConfigError(scenario_path.string() + ": robot route endpoint lies in an occupied cell");
    }
  }
  return w;
}

std::vector<World> load_worlds(std::span<const std::filesystem::path> scenario_paths) {
  if (scenario_paths.empty()) throw ConfigError("no scenarios given");
  std::vector<World> worlds;
  for (const auto& p : scenario_paths) worlds.push_back(load_world(p));
  return worlds;
}

sim::Context classify_context(const sim::StaticMap& map, const Pose& pose, std::span<const sim::Disc> agents,
                              const ContextRule& rule) {
  int near = 0;
  for (const auto& a : agents) {
    if ((a.center - pose.position()).norm() <= rule.crowd_radius) ++near;
  }
  if (near >= rule.crowd_count) return sim::Context::obstacles;
  const auto label = map.nearest_label(pose.position());
  if (!label) throw ConfigError("map has no context labels");
  return *label;
}

}  // namespace ptdrl::harness
