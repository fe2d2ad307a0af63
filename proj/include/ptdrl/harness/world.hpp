#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ptdrl/peds/scenario.hpp"
#include "ptdrl/sim/map.hpp"

namespace ptdrl::harness {

/// A scenario together with its loaded map.
struct World {
  peds::Scenario scenario;
  sim::StaticMap map;

  const std::string& name() const { return scenario.name; }
};

World load_world(const std::filesystem::path& scenario_path);
std::vector<World> load_worlds(std::span<const std::filesystem::path> scenario_paths);

struct ContextRule {
  double crowd_radius = 2.0;  // m, centre to centre
  int crowd_count = 2;
};

/// Region label at the pose (nearest labelled cell when unlabelled), overridden to
/// `obstacles` when at least crowd_count agents are within crowd_radius.
/// Throws ConfigError when the map carries no labels at all.
sim::Context classify_context(const sim::StaticMap& map, const Pose& pose, std::span<const sim::Disc> agents,
                              const ContextRule& rule = {});

}  // namespace ptdrl::harness
