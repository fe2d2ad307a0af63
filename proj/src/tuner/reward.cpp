#include "ptdrl/tuner/reward.hpp"

#include <cmath>

#include "ptdrl/common.hpp"

namespace ptdrl::tuner {

void RewardConfig::validate() const {
  if (!(w > 0) || !(d > 0) || !(maxvelrob > 0) || !std::isfinite(w) || !std::isfinite(d) || !std::isfinite(maxvelrob)) {
    throw ConfigError("reward: w, d and maxvelrob must be positive");
  }
}

double compute_reward(double velrob, const RewardConfig& cfg, double mindist) {
  return velrob * (mindist < cfg.d ? -cfg.w : 1.0) - cfg.maxvelrob;
}

}  // namespace ptdrl::tuner
