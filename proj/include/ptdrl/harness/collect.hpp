#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ptdrl/harness/episode.hpp"
#include "ptdrl/wm/dataset.hpp"

namespace ptdrl::harness {

/// Drives fixed-parameter episodes, cycling worlds, routes and parameter sets per
/// episode, and records (costmap, executed velocity, inflation) every tick until
/// exactly n_ticks records exist. The last episode is cut short when needed.
wm::Dataset collect_world_model_data(std::span<const World> worlds, const std::vector<planner::ParameterSet>& sets,
                                     std::size_t n_ticks, std::uint64_t seed, const EpisodeConfig& cfg = {},
                                     std::size_t* episodes_run = nullptr);

}  // namespace ptdrl::harness
