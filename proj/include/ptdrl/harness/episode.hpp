#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ptdrl/harness/world.hpp"
#include "ptdrl/json_util.hpp"
#include "ptdrl/planner/dwa.hpp"
#include "ptdrl/planner/global.hpp"
#include "ptdrl/planner/params.hpp"
#include "ptdrl/sim/costmap.hpp"
#include "ptdrl/sim/robot.hpp"
#include "ptdrl/tuner/dqn.hpp"
#include "ptdrl/tuner/reward.hpp"
#include "ptdrl/wm/mdn_rnn.hpp"
#include "ptdrl/wm/vae.hpp"

namespace ptdrl::harness {

/// Frozen VAE and MDN-RNN turning costmaps into the tuner's state.
struct WorldModel {
  wm::Vae vae;
  wm::MdnRnn rnn;

  void validate() const;
};

struct PolicyInput {
  std::span<const double> state;  // [z, h, v]; empty when the policy does not consume it
  sim::Context context;
  std::size_t tick;
};

/// Chooses a parameter-set index every tick. One instance serves one episode.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual const std::vector<planner::ParameterSet>& parameter_sets() const = 0;
  virtual bool uses_state() const { return false; }
  virtual std::size_t choose(const PolicyInput& input) = 0;
};

class FixedPolicy : public Policy {
 public:
  FixedPolicy(std::vector<planner::ParameterSet> sets, std::size_t index);
  const std::vector<planner::ParameterSet>& parameter_sets() const override { return sets_; }
  std::size_t choose(const PolicyInput&) override { return index_; }

 private:
  std::vector<planner::ParameterSet> sets_;
  std::size_t index_;
};

/// Per-context schedule: the set for context c is schedule[c].
class SchedulePolicy : public Policy {
 public:
  SchedulePolicy(std::vector<planner::ParameterSet> sets, std::array<std::size_t, sim::kNumContexts> schedule);
  const std::vector<planner::ParameterSet>& parameter_sets() const override { return sets_; }
  std::size_t choose(const PolicyInput& input) override { return schedule_[static_cast<std::size_t>(input.context)]; }

 private:
  std::vector<planner::ParameterSet> sets_;
  std::array<std::size_t, sim::kNumContexts> schedule_;
};

/// Epsilon-greedy over a Q-network. The network is borrowed and may keep training.
class TunerPolicy : public Policy {
 public:
  TunerPolicy(std::vector<planner::ParameterSet> sets, const tuner::QNetwork& net, std::uint64_t seed,
              std::function<double()> epsilon = {});
  const std::vector<planner::ParameterSet>& parameter_sets() const override { return sets_; }
  bool uses_state() const override { return true; }
  std::size_t choose(const PolicyInput& input) override;

 private:
  std::vector<planner::ParameterSet> sets_;
  const tuner::QNetwork* net_;
  Rng rng_;
  std::function<double()> epsilon_;
};

struct EpisodeSpec {
  std::size_t world = 0;
  std::size_t route = 0;
  std::uint64_t seed = 0;
  bool operator==(const EpisodeSpec&) const = default;
};

/// Seed of a tuner policy's exploration stream for an episode; shared by training and evaluation.
inline std::uint64_t policy_seed(const EpisodeSpec& spec) { return mix_seed(spec.seed, 2); }

struct EpisodeConfig {
  double dt = 0.1;                // s
  double timeout = 120.0;         // s
  double goal_tolerance = 0.4;    // m
  std::size_t max_ticks = 0;      // extra cap (0: none); a capped episode is neither goal nor timeout
  double initial_inflation = 0.55;
  tuner::RewardConfig reward;
  sim::CostmapConfig costmap;
  sim::RobotConfig robot;
  planner::DwaConfig dwa;
  planner::GlobalPlannerConfig global;
  ContextRule context;
  double stall_time = 3.0;        // s without stall_progress towards the goal triggers a replan
  double stall_progress = 0.2;    // m
};

struct TickRecord {
  Pose pose;                     // at the start of the tick
  sim::VelocityCmd cmd;
  double reward = 0.0;
  double mindist = 0.0;          // after the step, capped at the obstacle search range
  double velrob = 0.0;
  sim::Context context = sim::Context::open;
  std::uint32_t param_index = 0;
  bool collision = false;
  bool recovery = false;
  std::vector<Vec2> agents;      // agent positions at the start of the tick

  bool operator==(const TickRecord&) const = default;
};

struct EpisodeLog {
  std::string policy;
  std::string world;
  EpisodeSpec spec;
  Vec2 goal;
  std::vector<TickRecord> ticks;
  bool goal_reached = false;
  bool timeout = false;
  double dt = 0.1;

  double duration() const { return static_cast<double>(ticks.size()) * dt; }
  double total_reward() const;
  std::array<double, sim::kNumContexts> context_rewards() const;
  bool operator==(const EpisodeLog&) const = default;
};

/// What the observer sees each tick, after the step.
struct TickObservation {
  std::size_t tick;
  const sim::Costmap& costmap;  // observation costmap encoded this tick
  const TickRecord& record;
  double inflation;             // of the chosen set
};

/// One tuner transition, emitted once its successor state is known.
struct StepTransition {
  std::span<const double> state;
  std::size_t action;
  double reward;
  std::span<const double> next_state;
  bool done;
};

/// Inputs and output of the local planner call, before the step.
struct PlanObservation {
  std::size_t tick;
  const sim::Costmap& costmap;
  const sim::RobotState& state;
  std::span<const Vec2> path;
  const planner::ParameterSet& params;
  const planner::DwaResult& choice;
};

struct EpisodeHooks {
  std::function<void(const TickObservation&)> on_tick;
  std::function<void(const PlanObservation&)> on_plan;
  std::function<void(const StepTransition&)> on_transition;
};

/// Copy of the map with every disc rasterized as occupied (labels dropped).
sim::StaticMap with_discs(const sim::StaticMap& map, std::span<const sim::Disc> discs);

/// Runs one episode of the navigation loop: observe, encode, choose a parameter
/// set, plan, step the robot then the pedestrians, score, update the recurrent state.
/// A stalled robot replans its global path around the pedestrians' current positions.
/// `model` is required when the policy uses state or on_transition is set.
EpisodeLog run_episode(const World& world, const EpisodeSpec& spec, Policy& policy, const WorldModel* model,
                       const EpisodeConfig& cfg = {}, const EpisodeHooks& hooks = {},
                       const std::string& policy_name = "");

nlohmann::json episode_to_json(const EpisodeLog& log);
EpisodeLog episode_from_json(const nlohmann::json& j);

/// One episode per line.
void write_episode_logs(const std::filesystem::path& path, std::span<const EpisodeLog> logs);
std::vector<EpisodeLog> read_episode_logs(const std::filesystem::path& path);

}  // namespace ptdrl::harness
