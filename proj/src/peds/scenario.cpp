#include "ptdrl/peds/scenario.hpp"

#include <cmath>

#include "ptdrl/json_util.hpp"

namespace ptdrl::peds {

using json_util::Json;

Scenario parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir) {
  const Json j = json_util::parse(json_text, "scenario");
  json_util::check_keys(j, "scenario", {"name", "map", "robot_routes", "agents", "social_force"},
                        {"map", "robot_routes", "agents"});
  Scenario s;
  s.name = json_util::get_or<std::string>(j, "name", "", "scenario");
  s.map_path = base_dir / json_util::get<std::string>(j, "map", "scenario");

  for (const auto& r : j.at("robot_routes")) {
    json_util::check_keys(r, "robot_routes[]", {"start", "goal"}, {"start", "goal"});
    const auto& st = r.at("start");
    if (!st.is_array() || st.size() != 3) throw ConfigError("robot_routes[].start: expected [x, y, heading]");
    s.robot_routes.push_back({{st[0].get<double>(), st[1].get<double>(), st[2].get<double>()},
                              json_util::vec2(r.at("goal"), "robot_routes[].goal")});
  }
  if (s.robot_routes.empty()) throw ConfigError("scenario needs at least one robot route");

  for (const auto& a : j.at("agents")) {
    json_util::check_keys(a, "agents[]", {"start", "waypoints", "desired_speed", "radius"}, {"start", "waypoints"});
    AgentSpec spec;
    spec.start = json_util::vec2(a.at("start"), "agents[].start");
    for (const auto& w : a.at("waypoints")) spec.waypoints.push_back(json_util::vec2(w, "agents[].waypoints"));
    if (spec.waypoints.empty()) throw ConfigError("agents[]: waypoint route must not be empty");
    if (a.contains("desired_speed")) spec.desired_speed = json_util::get<double>(a, "desired_speed", "agents[]");
    spec.radius = json_util::get_or<double>(a, "radius", 0.3, "agents[]");
    if (!(spec.radius > 0)) throw ConfigError("agents[]: radius must be positive");
    s.agents.push_back(std::move(spec));
  }

  if (j.contains("social_force")) {
    const auto& f = j.at("social_force");
    json_util::check_keys(f, "social_force", {"tau", "A", "B", "A_w", "B_w"});
    auto& p = s.social_force;
    p.relaxation_time = json_util::get_or(f, "tau", p.relaxation_time, "social_force");
    p.repulsion_strength = json_util::get_or(f, "A", p.repulsion_strength, "social_force");
    p.repulsion_range = json_util::get_or(f, "B", p.repulsion_range, "social_force");
    p.wall_strength = json_util::get_or(f, "A_w", p.wall_strength, "social_force");
    p.wall_range = json_util::get_or(f, "B_w", p.wall_range, "social_force");
  }
  s.social_force.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  const Json j = json_util::load(path);
  try {
    return parse_scenario(j.dump(), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<Agent> spawn_agents(const Scenario& scenario, const sim::StaticMap& map, Rng& rng) {
  std::vector<Agent> agents;
  for (const auto& spec : scenario.agents) {
    Agent a;
    a.radius = spec.radius;
    a.waypoints = spec.waypoints;
    a.desired_speed = spec.desired_speed ? *spec.desired_speed : uniform(rng, 0.6, 1.2);
    a.position = spec.start;
    a.next_waypoint = 0;
    // Start somewhere along the looping route so episodes differ.
    const std::size_t n = spec.waypoints.size();
    for (int attempt = 0; attempt < 20; ++attempt) {
      const std::size_t seg = uniform_index(rng, n);
      const Vec2 from = seg == 0 ? spec.waypoints[n - 1] : spec.waypoints[seg - 1];
      const Vec2 to = spec.waypoints[seg];
      const double u = uniform(rng, 0.0, 1.0);
      const Vec2 p = from + (to - from) * u;
      bool ok = true;
      if (auto hit = map.nearest_obstacle(p, a.radius + 0.05); hit) ok = false;
      for (const auto& other : agents) ok = ok && (other.position - p).norm() > other.radius + a.radius + 0.1;
      if (ok) {
        a.position = p;
        a.next_waypoint = seg;
        break;
      }
    }
    agents.push_back(std::move(a));
  }
  return agents;
}

}  // namespace ptdrl::peds
