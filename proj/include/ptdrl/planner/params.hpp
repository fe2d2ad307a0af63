#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ptdrl/common.hpp"

namespace ptdrl::planner {

/// The eight DWA/costmap knobs switched by the tuner.
struct ParameterSet {
  std::string name;
  double max_vel_x = 0.55;          // m/s
  double max_vel_theta = 1.0;       // rad/s
  int vx_samples = 3;
  int vtheta_samples = 20;
  double occdist_scale = 0.01;
  double path_distance_bias = 32.0;
  double goal_distance_bias = 24.0;
  double inflation_radius = 0.55;   // m

  void validate() const;
  bool operator==(const ParameterSet&) const = default;
};

/// Baseline used by the "default" policy.
ParameterSet default_parameter_set();

/// Ordered list; the position of each entry is its action index.
std::vector<ParameterSet> parse_parameter_sets(const std::string& json_text);
std::vector<ParameterSet> load_parameter_sets(const std::filesystem::path& path);

}  // namespace ptdrl::planner
