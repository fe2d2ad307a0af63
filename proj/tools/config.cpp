#include <string>

#include "cli.hpp"
#include "ptdrl/common.hpp"
#include "ptdrl/json_util.hpp"

#ifndef PTDRL_DATA_DIR
#define PTDRL_DATA_DIR "data"
#endif

namespace ptdrl::cli {

using json_util::check_keys;
using json_util::Json;

namespace {

fs::path resolve(const fs::path& p, const fs::path& base_dir) {
  if (p.empty() || p.is_absolute()) return p;
  return base_dir / p;
}

template <typename T>
void take(const Json& j, const char* key, T& dst, const std::string& where) {
  if (j.contains(key)) dst = json_util::get<T>(j, key, where);
}

void take_path(const Json& j, const char* key, fs::path& dst, const fs::path& base_dir, const std::string& where) {
  if (j.contains(key)) dst = resolve(json_util::get<std::string>(j, key, where), base_dir);
}

const Json& section(const Json& j, const char* key) {
  static const Json empty = Json::object();
  const auto it = j.find(key);
  if (it == j.end()) return empty;
  if (!it->is_object()) throw ConfigError(std::string("config: '") + key + "' must be an object");
  return *it;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("config: " + what);
}

void require_file(const fs::path& p, const std::string& what) {
  if (p.empty()) throw ConfigError("config: " + what + " is not set");
  if (!fs::is_regular_file(p)) throw ConfigError("config: " + what + " not found: " + p.string());
}

}  // namespace

fs::path RunConfig::dataset_path() const { return paths.dataset.empty() ? output / "data" / "dataset.ptwm" : paths.dataset; }
fs::path RunConfig::vae_path() const { return paths.vae.empty() ? output / "checkpoints" / "vae.ptnn" : paths.vae; }
fs::path RunConfig::rnn_path() const { return paths.rnn.empty() ? output / "checkpoints" / "rnn.ptnn" : paths.rnn; }
fs::path RunConfig::qnet_path() const { return paths.qnet.empty() ? output / "checkpoints" / "qnet.ptnn" : paths.qnet; }

RunConfig default_config() {
  const fs::path data = PTDRL_DATA_DIR;
  RunConfig c;
  c.worlds = {data / "scenarios" / "corridor_loop.json", data / "scenarios" / "open_hall.json",
              data / "scenarios" / "hospital.json"};
  c.parameter_sets = data / "params" / "ptdrl4.json";
  c.appld.parameter_sets = data / "params" / "ptdrl4.json";
  c.collect.parameter_sets = data / "params" / "ptdrl8.json";
  return c;
}

RunConfig merge_config(RunConfig c, const Json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  check_keys(j, "config",
             {"seed", "output", "worlds", "parameter_sets", "appld", "collect", "vae", "rnn", "dqn", "reward",
              "episode", "eval", "surface", "replay", "paths"});
  take(j, "seed", c.seed, "config");
  take_path(j, "output", c.output, base_dir, "config");
  take_path(j, "parameter_sets", c.parameter_sets, base_dir, "config");
  if (j.contains("worlds")) {
    c.worlds.clear();
    for (const auto& w : json_util::get<std::vector<std::string>>(j, "worlds", "config"))
      c.worlds.push_back(resolve(w, base_dir));
  }

  const auto& ap = section(j, "appld");
  check_keys(ap, "config.appld", {"parameter_sets", "schedule"});
  take_path(ap, "parameter_sets", c.appld.parameter_sets, base_dir, "config.appld");
  take(ap, "schedule", c.appld.schedule, "config.appld");

  const auto& co = section(j, "collect");
  check_keys(co, "config.collect", {"ticks", "parameter_sets"});
  take(co, "ticks", c.collect.ticks, "config.collect");
  take_path(co, "parameter_sets", c.collect.parameter_sets, base_dir, "config.collect");

  const auto& va = section(j, "vae");
  check_keys(va, "config.vae", {"epochs", "batch", "lr", "beta", "hidden", "conv_encoder", "holdout"});
  take(va, "epochs", c.vae.epochs, "config.vae");
  take(va, "batch", c.vae.batch, "config.vae");
  take(va, "lr", c.vae.lr, "config.vae");
  take(va, "beta", c.vae.beta, "config.vae");
  take(va, "hidden", c.vae.hidden, "config.vae");
  take(va, "conv_encoder", c.vae.conv_encoder, "config.vae");
  take(va, "holdout", c.vae.holdout, "config.vae");

  const auto& rn = section(j, "rnn");
  check_keys(rn, "config.rnn", {"epochs", "streams", "seq_len", "lr", "grad_clip", "components", "holdout"});
  take(rn, "epochs", c.rnn.epochs, "config.rnn");
  take(rn, "streams", c.rnn.streams, "config.rnn");
  take(rn, "seq_len", c.rnn.seq_len, "config.rnn");
  take(rn, "lr", c.rnn.lr, "config.rnn");
  take(rn, "grad_clip", c.rnn.grad_clip, "config.rnn");
  take(rn, "components", c.rnn.components, "config.rnn");
  take(rn, "holdout", c.rnn.holdout, "config.rnn");

  const auto& dq = section(j, "dqn");
  check_keys(dq, "config.dqn",
             {"steps", "eps_start", "eps_end", "eps_fraction", "beta_start", "beta_end", "learn_start", "train_every",
              "gamma", "batch", "lr", "target_sync", "grad_clip", "capacity", "alpha", "priority_eps"});
  take(dq, "steps", c.dqn.steps, "config.dqn");
  take(dq, "eps_start", c.dqn.eps_start, "config.dqn");
  take(dq, "eps_end", c.dqn.eps_end, "config.dqn");
  take(dq, "eps_fraction", c.dqn.eps_fraction, "config.dqn");
  take(dq, "beta_start", c.dqn.beta_start, "config.dqn");
  take(dq, "beta_end", c.dqn.beta_end, "config.dqn");
  take(dq, "learn_start", c.dqn.learn_start, "config.dqn");
  take(dq, "train_every", c.dqn.train_every, "config.dqn");
  take(dq, "gamma", c.dqn.gamma, "config.dqn");
  take(dq, "batch", c.dqn.batch, "config.dqn");
  take(dq, "lr", c.dqn.lr, "config.dqn");
  take(dq, "target_sync", c.dqn.target_sync, "config.dqn");
  take(dq, "grad_clip", c.dqn.grad_clip, "config.dqn");
  take(dq, "capacity", c.dqn.capacity, "config.dqn");
  take(dq, "alpha", c.dqn.alpha, "config.dqn");
  take(dq, "priority_eps", c.dqn.priority_eps, "config.dqn");

  const auto& re = section(j, "reward");
  check_keys(re, "config.reward", {"w", "d", "maxvelrob"});
  take(re, "w", c.reward.w, "config.reward");
  take(re, "d", c.reward.d, "config.reward");
  take(re, "maxvelrob", c.reward.maxvelrob, "config.reward");

  const auto& ep = section(j, "episode");
  check_keys(ep, "config.episode", {"timeout", "goal_tolerance"});
  take(ep, "timeout", c.episode.timeout, "config.episode");
  take(ep, "goal_tolerance", c.episode.goal_tolerance, "config.episode");

  const auto& ev = section(j, "eval");
  check_keys(ev, "config.eval", {"episodes", "policies", "workers"});
  take(ev, "episodes", c.eval.episodes, "config.eval");
  take(ev, "policies", c.eval.policies, "config.eval");
  take(ev, "workers", c.eval.workers, "config.eval");

  const auto& su = section(j, "surface");
  check_keys(su, "config.surface", {"vel_bins", "vel_max", "dist_bins", "dist_max", "gamma"});
  take(su, "vel_bins", c.surface.vel_bins, "config.surface");
  take(su, "vel_max", c.surface.vel_max, "config.surface");
  take(su, "dist_bins", c.surface.dist_bins, "config.surface");
  take(su, "dist_max", c.surface.dist_max, "config.surface");
  take(su, "gamma", c.surface.gamma, "config.surface");

  const auto& rp = section(j, "replay");
  check_keys(rp, "config.replay", {"log", "episode", "every", "scale"});
  take_path(rp, "log", c.replay.log, base_dir, "config.replay");
  take(rp, "episode", c.replay.episode, "config.replay");
  take(rp, "every", c.replay.every, "config.replay");
  take(rp, "scale", c.replay.scale, "config.replay");

  const auto& pa = section(j, "paths");
  check_keys(pa, "config.paths", {"dataset", "vae", "rnn", "qnet"});
  take_path(pa, "dataset", c.paths.dataset, base_dir, "config.paths");
  take_path(pa, "vae", c.paths.vae, base_dir, "config.paths");
  take_path(pa, "rnn", c.paths.rnn, base_dir, "config.paths");
  take_path(pa, "qnet", c.paths.qnet, base_dir, "config.paths");
  return c;
}

Json config_to_json(const RunConfig& c) {
  Json worlds = Json::array();
  for (const auto& w : c.worlds) worlds.push_back(w.string());
  return Json{
      {"seed", c.seed},
      {"output", c.output.string()},
      {"worlds", worlds},
      {"parameter_sets", c.parameter_sets.string()},
      {"appld", {{"parameter_sets", c.appld.parameter_sets.string()}, {"schedule", c.appld.schedule}}},
      {"collect", {{"ticks", c.collect.ticks}, {"parameter_sets", c.collect.parameter_sets.string()}}},
      {"vae",
       {{"epochs", c.vae.epochs},
        {"batch", c.vae.batch},
        {"lr", c.vae.lr},
        {"beta", c.vae.beta},
        {"hidden", c.vae.hidden},
        {"conv_encoder", c.vae.conv_encoder},
        {"holdout", c.vae.holdout}}},
      {"rnn",
       {{"epochs", c.rnn.epochs},
        {"streams", c.rnn.streams},
        {"seq_len", c.rnn.seq_len},
        {"lr", c.rnn.lr},
        {"grad_clip", c.rnn.grad_clip},
        {"components", c.rnn.components},
        {"holdout", c.rnn.holdout}}},
      {"dqn",
       {{"steps", c.dqn.steps},
        {"eps_start", c.dqn.eps_start},
        {"eps_end", c.dqn.eps_end},
        {"eps_fraction", c.dqn.eps_fraction},
        {"beta_start", c.dqn.beta_start},
        {"beta_end", c.dqn.beta_end},
        {"learn_start", c.dqn.learn_start},
        {"train_every", c.dqn.train_every},
        {"gamma", c.dqn.gamma},
        {"batch", c.dqn.batch},
        {"lr", c.dqn.lr},
        {"target_sync", c.dqn.target_sync},
        {"grad_clip", c.dqn.grad_clip},
        {"capacity", c.dqn.capacity},
        {"alpha", c.dqn.alpha},
        {"priority_eps", c.dqn.priority_eps}}},
      {"reward", {{"w", c.reward.w}, {"d", c.reward.d}, {"maxvelrob", c.reward.maxvelrob}}},
      {"episode", {{"timeout", c.episode.timeout}, {"goal_tolerance", c.episode.goal_tolerance}}},
      {"eval", {{"episodes", c.eval.episodes}, {"policies", c.eval.policies}, {"workers", c.eval.workers}}},
      {"surface",
       {{"vel_bins", c.surface.vel_bins},
        {"vel_max", c.surface.vel_max},
        {"dist_bins", c.surface.dist_bins},
        {"dist_max", c.surface.dist_max},
        {"gamma", c.surface.gamma}}},
      {"replay",
       {{"log", c.replay.log.string()},
        {"episode", c.replay.episode},
        {"every", c.replay.every},
        {"scale", c.replay.scale}}},
      {"paths",
       {{"dataset", c.paths.dataset.string()},
        {"vae", c.paths.vae.string()},
        {"rnn", c.paths.rnn.string()},
        {"qnet", c.paths.qnet.string()}}},
  };
}

void validate_config(const RunConfig& c) {
  require(!c.output.empty(), "output directory is not set");
  require(!c.worlds.empty(), "at least one world is required");
  for (const auto& w : c.worlds) require_file(w, "world scenario");
  require_file(c.parameter_sets, "parameter_sets");
  require_file(c.appld.parameter_sets, "appld.parameter_sets");
  require_file(c.collect.parameter_sets, "collect.parameter_sets");
  require(c.collect.ticks > 0, "collect.ticks must be positive");
  require(c.vae.epochs >= 0 && c.vae.batch > 0 && c.vae.lr > 0 && c.vae.beta >= 0, "vae settings out of range");
  require(c.vae.holdout > 0 && c.vae.holdout < 1, "vae.holdout must lie in (0, 1)");
  require(c.rnn.epochs >= 0 && c.rnn.streams > 0 && c.rnn.seq_len > 0 && c.rnn.lr > 0 && c.rnn.components > 0,
          "rnn settings out of range");
  require(c.rnn.holdout > 0 && c.rnn.holdout < 1, "rnn.holdout must lie in (0, 1)");
  require(c.dqn.gamma >= 0 && c.dqn.gamma <= 1, "dqn.gamma must lie in [0, 1]");
  require(c.dqn.batch > 0 && c.dqn.lr > 0 && c.dqn.target_sync > 0 && c.dqn.capacity > 0, "dqn settings out of range");
  require(c.episode.timeout > 0 && c.episode.goal_tolerance > 0, "episode settings must be positive");
  require(c.eval.episodes >= 2, "eval.episodes must be at least 2");
  require(c.eval.workers >= 1, "eval.workers must be at least 1");
  require(!c.eval.policies.empty(), "eval.policies is empty");
  require(c.replay.every >= 1 && c.replay.scale >= 1, "replay.every and replay.scale must be positive");
}

}  // namespace ptdrl::cli
