#include "ptdrl/harness/evaluate.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace ptdrl::harness {

using json_util::Json;

std::vector<EpisodeSpec> paired_specs(std::span<const World> worlds, std::size_t n_episodes, std::uint64_t seed) {
  if (worlds.empty()) throw ConfigError("evaluation: no worlds");
  std::vector<EpisodeSpec> specs;
  for (std::size_t i = 0; i < n_episodes; ++i) {
    const std::size_t w = i % worlds.size();
    specs.push_back({w, (i / worlds.size()) % worlds[w].scenario.robot_routes.size(), mix_seed(seed, i)});
  }
  return specs;
}

std::vector<std::vector<EpisodeLog>> run_evaluation(std::span<const PolicyFactory> policies,
                                                    std::span<const World> worlds, const WorldModel* model,
                                                    std::span<const EpisodeSpec> specs, const EpisodeConfig& cfg,
                                                    std::size_t workers) {
  std::vector<std::vector<EpisodeLog>> logs(policies.size(), std::vector<EpisodeLog>(specs.size()));
  const std::size_t jobs = policies.size() * specs.size();
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto work = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      const std::size_t p = job / specs.size();
      const std::size_t i = job % specs.size();
      try {
        const auto& spec = specs[i];
        auto policy = policies[p].make(spec);
        logs[p][i] = run_episode(worlds[spec.world], spec, *policy, model, cfg, {}, policies[p].name);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs;
      }
    }
  };

  workers = std::max<std::size_t>(1, std::min(workers, jobs));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return logs;
}

Stat mean_ci(std::span<const double> values) {
  Stat s;
  s.n = values.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  const double sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  s.ci = 1.96 * sd / std::sqrt(static_cast<double>(s.n));
  return s;
}

PolicySummary summarize(const std::string& name, std::span<const EpisodeLog> logs) {
  PolicySummary s;
  s.name = name;
  double goals = 0.0;
  double collisions = 0.0;
  for (const auto& log : logs) {
    s.times.push_back(log.duration());
    s.context_rewards.push_back(log.context_rewards());
    s.totals.push_back(log.total_reward());
    goals += log.goal_reached ? 1.0 : 0.0;
    if (!log.ticks.empty()) {
      double v = 0.0, d = 0.0;
      for (const auto& t : log.ticks) {
        v += t.velrob;
        d += t.mindist;
        collisions += t.collision ? 1.0 : 0.0;
      }
      s.velocities.push_back(v / static_cast<double>(log.ticks.size()));
      s.mindists.push_back(d / static_cast<double>(log.ticks.size()));
    }
  }
  s.time = mean_ci(s.times);
  for (std::size_t c = 0; c < sim::kNumContexts; ++c) {
    std::vector<double> col;
    for (const auto& r : s.context_rewards) col.push_back(r[c]);
    s.context[c] = mean_ci(col);
  }
  s.total = mean_ci(s.totals);
  s.velocity = mean_ci(s.velocities);
  s.mindist = mean_ci(s.mindists);
  if (!logs.empty()) {
    s.goal_rate = goals / static_cast<double>(logs.size());
    s.collision_ticks = collisions / static_cast<double>(logs.size());
  }
  return s;
}

Report make_report(std::span<const std::string> names, std::span<const std::vector<EpisodeLog>> logs) {
  if (names.size() != logs.size()) throw ConfigError("report: name and log counts differ");
  Report r;
  for (std::size_t p = 0; p < names.size(); ++p) r.policies.push_back(summarize(names[p], logs[p]));
  return r;
}

namespace {

std::string cell(const Stat& s) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.3f ± %.3f", s.mean, s.ci);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Json stat_json(const Stat& s) { return {{"mean", s.mean}, {"ci95", s.ci}, {"n", s.n}}; }

Stat stat_from_json(const Json& j) { return {j.at("mean").get<double>(), j.at("ci95").get<double>(), j.at("n").get<std::size_t>()}; }

constexpr std::array<const char*, sim::kNumContexts> kContextRows{"Open", "Corridor", "Curve", "Obstacles"};

}  // namespace

std::string report_csv(const Report& report) {
  std::ostringstream os;
  os << "metric";
  for (const auto& p : report.policies) os << ',' << csv_field(p.name);
  os << '\n';
  const auto row = [&](const char* label, auto&& get) {
    os << label;
    for (const auto& p : report.policies) os << ',' << cell(get(p));
    os << '\n';
  };
  row("Time", [](const PolicySummary& p) { return p.time; });
  for (std::size_t c = 0; c < sim::kNumContexts; ++c) {
    row(kContextRows[c], [c](const PolicySummary& p) { return p.context[c]; });
  }
  row("Total", [](const PolicySummary& p) { return p.total; });
  return os.str();
}

Json report_json(const Report& report) {
  Json policies = Json::array();
  for (const auto& p : report.policies) {
    Json contexts = Json::object();
    Json raw_contexts = Json::array();
    for (std::size_t c = 0; c < sim::kNumContexts; ++c) {
      contexts[std::string(sim::to_string(static_cast<sim::Context>(c)))] = stat_json(p.context[c]);
    }
    for (const auto& r : p.context_rewards) raw_contexts.push_back(r);
    policies.push_back({{"name", p.name},
                        {"time", stat_json(p.time)},
                        {"contexts", contexts},
                        {"total", stat_json(p.total)},
                        {"velocity", stat_json(p.velocity)},
                        {"mindist", stat_json(p.mindist)},
                        {"goal_rate", p.goal_rate},
                        {"collision_ticks", p.collision_ticks},
                        {"episodes",
                         {{"time", p.times},
                          {"context_rewards", raw_contexts},
                          {"total", p.totals},
                          {"velocity", p.velocities},
                          {"mindist", p.mindists}}}});
  }
  return {{"context_order", {"open", "corridor", "curve", "obstacles"}}, {"policies", policies}};
}

Report report_from_json(const Json& j) {
  try {
    Report r;
    for (const auto& pj : j.at("policies")) {
      PolicySummary p;
      p.name = pj.at("name").get<std::string>();
      p.time = stat_from_json(pj.at("time"));
      for (std::size_t c = 0; c < sim::kNumContexts; ++c) {
        p.context[c] = stat_from_json(pj.at("contexts").at(std::string(sim::to_string(static_cast<sim::Context>(c)))));
      }
      p.total = stat_from_json(pj.at("total"));
      p.velocity = stat_from_json(pj.at("velocity"));
      p.mindist = stat_from_json(pj.at("mindist"));
      p.goal_rate = pj.at("goal_rate").get<double>();
      p.collision_ticks = pj.at("collision_ticks").get<double>();
      const auto& ep = pj.at("episodes");
      p.times = ep.at("time").get<std::vector<double>>();
      p.context_rewards = ep.at("context_rewards").get<std::vector<std::array<double, sim::kNumContexts>>>();
      p.totals = ep.at("total").get<std::vector<double>>();
      p.velocities = ep.at("velocity").get<std::vector<double>>();
      p.mindists = ep.at("mindist").get<std::vector<double>>();
      r.policies.push_back(std::move(p));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("report json: ") + e.what());
  }
}

void SurfaceConfig::validate() const {
  if (vel_bins == 0 || dist_bins == 0) throw ConfigError("value surface: bin counts must be positive");
  if (!(vel_max > 0.0) || !(dist_max > 0.0)) throw ConfigError("value surface: ranges must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("value surface: gamma must lie in [0, 1]");
}

double Surface::value(std::size_t vi, std::size_t di) const {
  const auto i = index(vi, di);
  return visits[i] ? sum[i] / static_cast<double>(visits[i]) : std::numeric_limits<double>::quiet_NaN();
}

std::size_t Surface::total_visits() const {
  std::size_t n = 0;
  for (auto v : visits) n += v;
  return n;
}

double Surface::mean() const {
  const auto n = total_visits();
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double v : sum) s += v;
  return s / static_cast<double>(n);
}

std::array<Surface, sim::kNumContexts> value_surface(std::span<const EpisodeLog> logs, const SurfaceConfig& cfg) {
  cfg.validate();
  if (logs.empty()) throw ConfigError("value surface: no logs");
  std::array<Surface, sim::kNumContexts> out;
  for (auto& s : out) {
    s.vel_bins = cfg.vel_bins;
    s.dist_bins = cfg.dist_bins;
    s.vel_max = cfg.vel_max;
    s.dist_max = cfg.dist_max;
    s.sum.assign(cfg.vel_bins * cfg.dist_bins, 0.0);
    s.visits.assign(cfg.vel_bins * cfg.dist_bins, 0);
  }
  const auto bin = [](double v, double max, std::size_t bins) {
    const double f = std::floor(std::max(v, 0.0) / max * static_cast<double>(bins));
    return std::min(static_cast<std::size_t>(f), bins - 1);
  };
  for (const auto& log : logs) {
    double g = 0.0;
    for (std::size_t t = log.ticks.size(); t-- > 0;) {
      const auto& tick = log.ticks[t];
      g = tick.reward + cfg.gamma * g;
      auto& s = out[static_cast<std::size_t>(tick.context)];
      const auto i = s.index(bin(tick.velrob, cfg.vel_max, cfg.vel_bins), bin(tick.mindist, cfg.dist_max, cfg.dist_bins));
      s.sum[i] += g;
      ++s.visits[i];
    }
  }
  return out;
}

void write_surface(const std::filesystem::path& path, const Surface& surface) {
  std::ofstream os(path);
  if (!os) throw RuntimeError("cannot write " + path.string());
  os << "# velocity mindist value visits\n";
  char buf[128];
  for (std::size_t vi = 0; vi < surface.vel_bins; ++vi) {
    const double v = (static_cast<double>(vi) + 0.5) * surface.vel_max / static_cast<double>(surface.vel_bins);
    for (std::size_t di = 0; di < surface.dist_bins; ++di) {
      const double d = (static_cast<double>(di) + 0.5) * surface.dist_max / static_cast<double>(surface.dist_bins);
      const auto i = surface.index(vi, di);
      if (surface.visits[i]) {
        std::snprintf(buf, sizeof buf, "%.4f %.4f %.6f %zu\n", v, d, surface.value(vi, di), surface.visits[i]);
      } else {
        std::snprintf(buf, sizeof buf, "%.4f %.4f NaN 0\n", v, d);
      }
      os << buf;
    }
    os << '\n';
  }
  if (!os) throw RuntimeError("write failed: " + path.string());
}

}  // namespace ptdrl::harness
