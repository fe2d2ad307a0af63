#include "ptdrl/planner/params.hpp"

#include <cmath>

#include "ptdrl/json_util.hpp"

namespace ptdrl::planner {

void ParameterSet::validate() const {
  const std::string where = "parameter set '" + name + "'";
  auto finite = [](double v) { return std::isfinite(v); };
  if (!(finite(max_vel_x) && max_vel_x > 0)) throw ConfigError(where + ": max_vel_x must be positive");
  if (!(finite(max_vel_theta) && max_vel_theta > 0)) throw ConfigError(where + ": max_vel_theta must be positive");
  if (vx_samples < 1 || vtheta_samples < 1) throw ConfigError(where + ": sample counts must be at least 1");
  if (!(finite(occdist_scale) && occdist_scale >= 0 && finite(path_distance_bias) && path_distance_bias >= 0 &&
        finite(goal_distance_bias) && goal_distance_bias >= 0)) {
    throw ConfigError(where + ": weights must be non-negative");
  }
  if (!(finite(inflation_radius) && inflation_radius >= 0)) throw ConfigError(where + ": inflation_radius must be >= 0");
}

ParameterSet default_parameter_set() {
  ParameterSet p;
  p.name = "default";
  return p;
}

std::vector<ParameterSet> parse_parameter_sets(const std::string& json_text) {
  using json_util::get;
  const auto j = json_util::parse(json_text, "parameter sets");
  json_util::check_keys(j, "parameter sets", {"name", "parameter_sets"}, {"parameter_sets"});
  std::vector<ParameterSet> out;
  for (const auto& e : j.at("parameter_sets")) {
    const char* where = "parameter_sets[]";
    json_util::check_keys(e, where,
                          {"name", "max_vel_x", "max_vel_theta", "vx_samples", "vtheta_samples", "occdist_scale",
                           "path_distance_bias", "goal_distance_bias", "inflation_radius"},
                          {"max_vel_x", "max_vel_theta", "vx_samples", "vtheta_samples", "occdist_scale",
                           "path_distance_bias", "goal_distance_bias", "inflation_radius"});
    ParameterSet p;
    p.name = json_util::get_or<std::string>(e, "name", "set" + std::to_string(out.size()), where);
    p.max_vel_x = get<double>(e, "max_vel_x", where);
    p.max_vel_theta = get<double>(e, "max_vel_theta", where);
    p.vx_samples = get<int>(e, "vx_samples", where);
    p.vtheta_samples = get<int>(e, "vtheta_samples", where);
    p.occdist_scale = get<double>(e, "occdist_scale", where);
    p.path_distance_bias = get<double>(e, "path_distance_bias", where);
    p.goal_distance_bias = get<double>(e, "goal_distance_bias", where);
    p.inflation_radius = get<double>(e, "inflation_radius", where);
    p.validate();
    out.push_back(std::move(p));
  }
  if (out.empty()) throw ConfigError("parameter sets: list is empty");
  return out;
}

std::vector<ParameterSet> load_parameter_sets(const std::filesystem::path& path) {
  try {
    return parse_parameter_sets(json_util::load(path).dump());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace ptdrl::planner
