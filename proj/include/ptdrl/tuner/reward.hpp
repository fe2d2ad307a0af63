#pragma once

namespace ptdrl::tuner {

struct RewardConfig {
  double w = 1.0;           // penalty weight inside the safety distance
  double d = 0.75;          // safety distance, m
  double maxvelrob = 1.59;  // robot's maximal velocity, m/s

  void validate() const;
};

/// velrob * (-w if mindist < d else 1) - maxvelrob.
double compute_reward(double velrob, const RewardConfig& cfg, double mindist);

}  // namespace ptdrl::tuner
