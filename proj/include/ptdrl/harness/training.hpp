#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ptdrl/harness/episode.hpp"
#include "ptdrl/tuner/dqn.hpp"

namespace ptdrl::harness {

struct DqnTrainConfig {
  std::size_t steps = 200000;     // environment ticks
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_fraction = 0.3;      // of steps spent annealing epsilon
  double beta_start = 0.4;        // importance-sampling exponent, annealed over all steps
  double beta_end = 1.0;
  std::size_t learn_start = 1000; // transitions stored before the first update
  std::size_t train_every = 1;    // transitions per update
  std::uint64_t seed = 0;

  void validate() const;
};

double linear_schedule(double start, double end, double progress);

struct TrainEpisodeStats {
  std::size_t episode = 0;
  std::size_t total_steps = 0;  // after this episode
  std::size_t ticks = 0;
  double reward = 0.0;
  double duration = 0.0;
  bool goal_reached = false;
  double epsilon = 0.0;         // at the end of the episode
  double mean_loss = 0.0;       // over this episode's updates (0 when none)
  double mean_q = 0.0;          // mean Q(s, a) of the sampled batches
  std::size_t updates = 0;
};

/// Spec of training episode e: worlds and routes cycled, seeds independent of evaluation streams.
EpisodeSpec training_spec(std::span<const World> worlds, std::uint64_t seed, std::size_t e);

/// Runs training episodes through the shared episode runner until `steps` ticks have
/// been taken, storing every transition and learning from prioritized minibatches.
std::vector<TrainEpisodeStats> train_dqn(
    tuner::DqnLearner& learner, std::span<const World> worlds, const std::vector<planner::ParameterSet>& sets,
    const WorldModel& model, const EpisodeConfig& episode_cfg, const DqnTrainConfig& cfg,
    const std::function<void(const TrainEpisodeStats&, const EpisodeLog&)>& on_episode = {});

}  // namespace ptdrl::harness
