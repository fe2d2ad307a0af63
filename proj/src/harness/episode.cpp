#include "ptdrl/harness/episode.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

namespace ptdrl::harness {

using json_util::Json;

void WorldModel::validate() const {
  const auto& v = vae.config();
  const auto& r = rnn.config();
  if (v.latent != r.latent) throw ConfigError("world model: VAE latent and MDN-RNN latent differ");
  if (r.action != 3) throw ConfigError("world model: MDN-RNN action size must be 3");
  if (v.latent + r.hidden + tuner::kVelocitySize != tuner::kStateSize) {
    throw ConfigError("world model: latent + hidden + 2 must equal the tuner state size");
  }
}

FixedPolicy::FixedPolicy(std::vector<planner::ParameterSet> sets, std::size_t index)
    : sets_(std::move(sets)), index_(index) {
  if (index_ >= sets_.size()) throw ConfigError("fixed policy: index " + std::to_string(index_) + " out of range");
}

SchedulePolicy::SchedulePolicy(std::vector<planner::ParameterSet> sets,
                               std::array<std::size_t, sim::kNumContexts> schedule)
    : sets_(std::move(sets)), schedule_(schedule) {
  for (auto i : schedule_) {
    if (i >= sets_.size()) throw ConfigError("schedule policy: index out of range");
  }
}

TunerPolicy::TunerPolicy(std::vector<planner::ParameterSet> sets, const tuner::QNetwork& net, std::uint64_t seed,
                         std::function<double()> epsilon)
    : sets_(std::move(sets)), net_(&net), rng_(seed), epsilon_(std::move(epsilon)) {
  if (net.n_actions() != sets_.size()) {
    throw ConfigError("tuner policy: network has " + std::to_string(net.n_actions()) + " outputs but " +
                      std::to_string(sets_.size()) + " parameter sets were given");
  }
}

std::size_t TunerPolicy::choose(const PolicyInput& input) {
  const auto q = tuner::q_forward(*net_, input.state);
  return tuner::select_action(q, epsilon_ ? epsilon_() : 0.0, rng_);
}

double EpisodeLog::total_reward() const {
  double sum = 0.0;
  for (const auto& t : ticks) sum += t.reward;
  return sum;
}

std::array<double, sim::kNumContexts> EpisodeLog::context_rewards() const {
  std::array<double, sim::kNumContexts> out{};
  for (const auto& t : ticks) out[static_cast<std::size_t>(t.context)] += t.reward;
  return out;
}

namespace {

std::vector<double> observe(const WorldModel& model, const sim::Costmap& costmap, const nn::LstmState& h,
                            const sim::VelocityCmd& velocity, nn::Tensor& z) {
  const auto pixels = costmap.normalized();
  z = model.vae.latent(nn::Tensor({1, pixels.size()}, pixels));
  return tuner::make_state(z.data(), h.h.data(), velocity.linear, velocity.angular);
}

// Drops waypoints behind the one nearest to the robot (looking a few ahead).
std::size_t advance_path(Vec2 p, const std::vector<Vec2>& path, std::size_t next) {
  constexpr std::size_t kWindow = 8;
  std::size_t best = next;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = next; i < std::min(path.size(), next + kWindow); ++i) {
    const double d = (path[i] - p).norm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return std::min(best, path.size() - 1);
}

}  // namespace

sim::StaticMap with_discs(const sim::StaticMap& map, std::span<const sim::Disc> discs) {
  auto occ = map.occupancy();
  for (const auto& d : discs) {
    const auto lo = map.cell_of(d.center - Vec2{d.radius, d.radius});
    const auto hi = map.cell_of(d.center + Vec2{d.radius, d.radius});
    for (int y = std::max(lo.y, 0); y <= std::min(hi.y, map.height() - 1); ++y) {
      for (int x = std::max(lo.x, 0); x <= std::min(hi.x, map.width() - 1); ++x) {
        if ((map.center_of({x, y}) - d.center).norm() <= d.radius) occ[static_cast<std::size_t>(y * map.width() + x)] = 1;
      }
    }
  }
  return sim::StaticMap(map.resolution(), map.width(), map.height(), std::move(occ), {});
}

EpisodeLog run_episode(const World& world, const EpisodeSpec& spec, Policy& policy, const WorldModel* model,
                       const EpisodeConfig& cfg, const EpisodeHooks& hooks, const std::string& policy_name) {
  const auto& scenario = world.scenario;
  if (spec.route >= scenario.robot_routes.size()) {
    throw ConfigError("episode: route " + std::to_string(spec.route) + " out of range for " + world.name());
  }
  const bool need_model = policy.uses_state() || static_cast<bool>(hooks.on_transition);
  if (need_model && model == nullptr) throw ConfigError("episode: policy needs a world model");
  const auto& sets = policy.parameter_sets();
  if (sets.empty()) throw ConfigError("episode: policy has no parameter sets");

  const auto& route = scenario.robot_routes[spec.route];
  EpisodeLog log;
  log.policy = policy_name;
  log.world = world.name();
  log.spec = spec;
  log.goal = route.goal;
  log.dt = cfg.dt;

  Rng spawn_rng(mix_seed(spec.seed, 0));
  Rng crowd_rng(mix_seed(spec.seed, 1));
  auto agents = peds::spawn_agents(scenario, world.map, spawn_rng);
  sim::RobotState robot{route.start, {}};
  auto path = planner::plan_global(world.map, route.start.position(), route.goal, cfg.global);
  std::size_t next_wp = 0;
  const auto stall_ticks = static_cast<std::size_t>(std::llround(cfg.stall_time / cfg.dt));
  std::size_t mark_tick = 0;
  double mark_dist = (route.start.position() - route.goal).norm();

  double inflation = cfg.initial_inflation;
  nn::LstmState h;
  if (need_model) h = model->rnn.initial_state(1);
  nn::Tensor z;
  std::vector<double> state;
  std::vector<double> prev_state;
  std::optional<std::pair<std::size_t, double>> pending;  // action, reward

  const auto timeout_ticks = static_cast<std::size_t>(std::llround(cfg.timeout / cfg.dt));
  for (std::size_t tick = 0;; ++tick) {
    if ((robot.pose.position() - route.goal).norm() <= cfg.goal_tolerance) {
      log.goal_reached = true;
      break;
    }
    if (tick >= timeout_ticks) {
      log.timeout = true;
      break;
    }
    if (cfg.max_ticks != 0 && tick >= cfg.max_ticks) break;

    const auto discs = peds::discs(agents);
    TickRecord rec;
    rec.pose = robot.pose;
    rec.context = classify_context(world.map, robot.pose, discs, cfg.context);
    for (const auto& a : agents) rec.agents.push_back(a.position);

    const auto obs = sim::build_local_costmap(world.map, discs, robot.pose, inflation, cfg.costmap);
    if (need_model) {
      state = observe(*model, obs, h, robot.velocity, z);
      if (pending && hooks.on_transition) {
        hooks.on_transition({prev_state, pending->first, pending->second, state, false});
      }
    }

    const std::size_t idx = policy.choose({state, rec.context, tick});
    if (idx >= sets.size()) throw RuntimeError("episode: policy chose index " + std::to_string(idx));
    const auto& theta = sets[idx];
    const auto plan_map = theta.inflation_radius == inflation
                              ? obs
                              : sim::build_local_costmap(world.map, discs, robot.pose, theta.inflation_radius,
                                                         cfg.costmap);

    const double goal_dist = (robot.pose.position() - route.goal).norm();
    if (goal_dist < mark_dist - cfg.stall_progress) {
      mark_dist = goal_dist;
      mark_tick = tick;
    } else if (tick - mark_tick >= stall_ticks) {
      mark_dist = goal_dist;
      mark_tick = tick;
      try {
        path = planner::plan_global(with_discs(world.map, discs), robot.pose.position(), route.goal, cfg.global);
        next_wp = 0;
      } catch (const PlanningError&) {
        // Boxed in by pedestrians: keep the previous path.
      }
    }
    next_wp = advance_path(robot.pose.position(), path, next_wp);
    const auto remaining = std::span<const Vec2>(path).subspan(next_wp);
    planner::DwaResult choice;
    try {
      choice = planner::dwa_select(plan_map, robot, remaining, theta, cfg.dwa);
    } catch (const PlanningError& e) {
      throw PlanningError("tick " + std::to_string(tick) + ": " + e.what());
    }
    if (hooks.on_plan) hooks.on_plan({tick, plan_map, robot, remaining, theta, choice});

    const auto step = sim::step_robot(world.map, discs, robot, choice.command, cfg.dt, cfg.robot);
    robot = step.state;
    peds::step_agents(agents, sim::Disc{robot.pose.position(), cfg.robot.radius}, world.map, scenario.social_force,
                      cfg.dt, crowd_rng);
    const auto after = peds::discs(agents);

    rec.cmd = choice.command;
    rec.recovery = choice.recovery;
    rec.collision = step.collision;
    rec.param_index = static_cast<std::uint32_t>(idx);
    rec.mindist = std::min(sim::min_obstacle_distance(world.map, after, robot.pose, cfg.robot),
                           cfg.robot.obstacle_search);
    rec.velrob = std::abs(choice.command.linear);
    rec.reward = tuner::compute_reward(rec.velrob, cfg.reward, rec.mindist);
    log.ticks.push_back(std::move(rec));
    const auto& stored = log.ticks.back();

    if (hooks.on_tick) hooks.on_tick({tick, obs, stored, theta.inflation_radius});
    if (need_model) {
      const auto action =
          nn::Tensor({1, 3}, std::vector<double>{choice.command.linear, choice.command.angular, theta.inflation_radius});
      h = model->rnn.step(z, action, h).state;
      prev_state = state;
      pending = std::make_pair(idx, stored.reward);
    }
    inflation = theta.inflation_radius;
  }

  if (pending && hooks.on_transition) {
    const auto obs = sim::build_local_costmap(world.map, peds::discs(agents), robot.pose, inflation, cfg.costmap);
    state = observe(*model, obs, h, robot.velocity, z);
    hooks.on_transition({prev_state, pending->first, pending->second, state, log.goal_reached});
  }
  return log;
}

Json episode_to_json(const EpisodeLog& log) {
  Json ticks = Json::array();
  for (std::size_t i = 0; i < log.ticks.size(); ++i) {
    const auto& t = log.ticks[i];
    Json agents = Json::array();
    for (const auto& a : t.agents) agents.push_back({a.x, a.y});
    ticks.push_back({{"t", static_cast<double>(i) * log.dt},
                     {"pose", {t.pose.x, t.pose.y, t.pose.heading}},
                     {"cmd", {t.cmd.linear, t.cmd.angular}},
                     {"reward", t.reward},
                     {"mindist", t.mindist},
                     {"velrob", t.velrob},
                     {"context", std::string(sim::to_string(t.context))},
                     {"param_index", t.param_index},
                     {"collision", t.collision},
                     {"recovery", t.recovery},
                     {"agents", std::move(agents)}});
  }
  return {{"policy", log.policy},
          {"world", log.world},
          {"route", log.spec.route},
          {"world_index", log.spec.world},
          {"seed", log.spec.seed},
          {"goal", {log.goal.x, log.goal.y}},
          {"dt", log.dt},
          {"goal_reached", log.goal_reached},
          {"timeout", log.timeout},
          {"duration", log.duration()},
          {"total_reward", log.total_reward()},
          {"ticks", std::move(ticks)}};
}

EpisodeLog episode_from_json(const Json& j) {
  constexpr std::string_view where = "episode log";
  try {
    EpisodeLog log;
    log.policy = j.at("policy").get<std::string>();
    log.world = j.at("world").get<std::string>();
    log.spec.route = j.at("route").get<std::size_t>();
    log.spec.world = j.at("world_index").get<std::size_t>();
    log.spec.seed = j.at("seed").get<std::uint64_t>();
    log.goal = json_util::vec2(j.at("goal"), where);
    log.dt = j.at("dt").get<double>();
    log.goal_reached = j.at("goal_reached").get<bool>();
    log.timeout = j.at("timeout").get<bool>();
    for (const auto& t : j.at("ticks")) {
      TickRecord r;
      const auto& p = t.at("pose");
      r.pose = {p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()};
      r.cmd = {t.at("cmd").at(0).get<double>(), t.at("cmd").at(1).get<double>()};
      r.reward = t.at("reward").get<double>();
      r.mindist = t.at("mindist").get<double>();
      r.velrob = t.at("velrob").get<double>();
      r.context = sim::context_from_string(t.at("context").get<std::string>());
      r.param_index = t.at("param_index").get<std::uint32_t>();
      r.collision = t.at("collision").get<bool>();
      r.recovery = t.at("recovery").get<bool>();
      for (const auto& a : t.at("agents")) r.agents.push_back(json_util::vec2(a, where));
      log.ticks.push_back(std::move(r));
    }
    return log;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(where) + ": " + e.what());
  }
}

void write_episode_logs(const std::filesystem::path& path, std::span<const EpisodeLog> logs) {
  std::ofstream os(path);
  if (!os) throw RuntimeError("cannot write " + path.string());
  for (const auto& log : logs) os << episode_to_json(log).dump() << '\n';
  if (!os) throw RuntimeError("write failed: " + path.string());
}

std::vector<EpisodeLog> read_episode_logs(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path.string());
  std::vector<EpisodeLog> logs;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    logs.push_back(episode_from_json(json_util::parse(line, path.string())));
  }
  return logs;
}

}  // namespace ptdrl::harness
