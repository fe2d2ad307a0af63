#include "ptdrl/harness/collect.hpp"

namespace ptdrl::harness {

wm::Dataset collect_world_model_data(std::span<const World> worlds, const std::vector<planner::ParameterSet>& sets,
                                     std::size_t n_ticks, std::uint64_t seed, const EpisodeConfig& cfg,
                                     std::size_t* episodes_run) {
  if (n_ticks == 0) throw ConfigError("collect: n_ticks must be positive");
  if (worlds.empty() || sets.empty()) throw ConfigError("collect: need at least one world and one parameter set");
  wm::Dataset data;
  data.side = cfg.costmap.side;
  std::size_t stalled = 0;
  std::size_t e = 0;
  for (; data.size() < n_ticks; ++e) {
    const auto& world = worlds[e % worlds.size()];
    EpisodeSpec spec{e % worlds.size(), (e / worlds.size()) % world.scenario.robot_routes.size(), mix_seed(seed, e)};
    FixedPolicy policy(sets, e % sets.size());
    EpisodeConfig ecfg = cfg;
    ecfg.max_ticks = n_ticks - data.size();
    bool first = true;
    EpisodeHooks hooks;
    hooks.on_tick = [&](const TickObservation& t) {
      data.append(t.costmap.cost, {t.record.cmd.linear, t.record.cmd.angular, t.inflation}, first);
      first = false;
    };
    run_episode(world, spec, policy, nullptr, ecfg, hooks, sets[e % sets.size()].name);
    // Episodes that start at their goal record nothing; bail out if that is all there is.
    stalled = first ? stalled + 1 : 0;
    if (stalled > worlds.size() * sets.size() * 8) throw RuntimeError("collect: episodes produce no ticks");
  }
  if (episodes_run) *episodes_run = e;
  return data;
}

}  // namespace ptdrl::harness
