#include "ptdrl/harness/training.hpp"

#include <algorithm>

namespace ptdrl::harness {

void DqnTrainConfig::validate() const {
  const auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(eps_start) || !unit(eps_end)) throw ConfigError("dqn training: epsilon must lie in [0, 1]");
  if (!(eps_fraction > 0.0 && eps_fraction <= 1.0)) throw ConfigError("dqn training: eps_fraction must lie in (0, 1]");
  if (!unit(beta_start) || !unit(beta_end)) throw ConfigError("dqn training: beta must lie in [0, 1]");
  if (train_every == 0) throw ConfigError("dqn training: train_every must be positive");
}

double linear_schedule(double start, double end, double progress) {
  return start + (end - start) * std::clamp(progress, 0.0, 1.0);
}

EpisodeSpec training_spec(std::span<const World> worlds, std::uint64_t seed, std::size_t e) {
  const std::size_t w = e % worlds.size();
  return {w, (e / worlds.size()) % worlds[w].scenario.robot_routes.size(), mix_seed(seed ^ 0x5452414e53ULL, e)};
}

std::vector<TrainEpisodeStats> train_dqn(
    tuner::DqnLearner& learner, std::span<const World> worlds, const std::vector<planner::ParameterSet>& sets,
    const WorldModel& model, const EpisodeConfig& episode_cfg, const DqnTrainConfig& cfg,
    const std::function<void(const TrainEpisodeStats&, const EpisodeLog&)>& on_episode) {
  cfg.validate();
  model.validate();
  if (worlds.empty()) throw ConfigError("dqn training: no worlds");
  if (learner.online().n_actions() != sets.size()) throw ConfigError("dqn training: action count mismatch");

  Rng learn_rng(mix_seed(cfg.seed, 0x4c524e));
  std::size_t steps = 0;
  std::size_t transitions = 0;
  const double anneal = std::max(1.0, cfg.eps_fraction * static_cast<double>(cfg.steps));
  const auto epsilon = [&] { return linear_schedule(cfg.eps_start, cfg.eps_end, static_cast<double>(steps) / anneal); };
  const auto beta = [&] {
    return linear_schedule(cfg.beta_start, cfg.beta_end,
                           static_cast<double>(steps) / std::max<double>(1.0, static_cast<double>(cfg.steps)));
  };

  std::vector<TrainEpisodeStats> history;
  for (std::size_t e = 0; steps < cfg.steps; ++e) {
    const auto spec = training_spec(worlds, cfg.seed, e);
    TunerPolicy policy(sets, learner.online(), policy_seed(spec), epsilon);
    TrainEpisodeStats stats;
    stats.episode = e;
    double loss_sum = 0.0;
    double q_sum = 0.0;

    EpisodeHooks hooks;
    hooks.on_tick = [&](const TickObservation&) { ++steps; };
    hooks.on_transition = [&](const StepTransition& t) {
      tuner::Transition tr;
      tr.state.assign(t.state.begin(), t.state.end());
      tr.next_state.assign(t.next_state.begin(), t.next_state.end());
      tr.action = static_cast<std::uint32_t>(t.action);
      tr.reward = t.reward;
      tr.done = t.done;
      learner.remember(std::move(tr));
      ++transitions;
      if (transitions >= cfg.learn_start && transitions % cfg.train_every == 0 &&
          learner.replay().size() >= learner.hyper().batch) {
        const auto ls = learner.learn(beta(), learn_rng);
        loss_sum += ls.loss;
        q_sum += ls.mean_q;
        ++stats.updates;
      }
    };

    EpisodeConfig ecfg = episode_cfg;
    ecfg.max_ticks = cfg.steps - steps;
    const auto log = run_episode(worlds[spec.world], spec, policy, &model, ecfg, hooks, "ptdrl");

    stats.total_steps = steps;
    stats.ticks = log.ticks.size();
    stats.reward = log.total_reward();
    stats.duration = log.duration();
    stats.goal_reached = log.goal_reached;
    stats.epsilon = epsilon();
    stats.mean_loss = stats.updates ? loss_sum / static_cast<double>(stats.updates) : 0.0;
    stats.mean_q = stats.updates ? q_sum / static_cast<double>(stats.updates) : 0.0;
    history.push_back(stats);
    if (on_episode) on_episode(stats, log);
    if (log.ticks.empty() && e > worlds.size() * 64) throw RuntimeError("dqn training: episodes produce no ticks");
  }
  return history;
}

}  // namespace ptdrl::harness
