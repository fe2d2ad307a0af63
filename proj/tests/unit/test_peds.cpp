#include <gtest/gtest.h>

#include <cmath>

#include "ptdrl/peds/scenario.hpp"
#include "ptdrl/peds/social_force.hpp"
#include "ptdrl/sim/robot.hpp"

using namespace ptdrl;
using namespace ptdrl::peds;

namespace {

sim::StaticMap room(double w, double h, double res = 0.1, const std::vector<sim::Cell>& extra = {}) {
  const int nx = static_cast<int>(std::lround(w / res));
  const int ny = static_cast<int>(std::lround(h / res));
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(nx * ny), 0);
  for (int x = 0; x < nx; ++x) occ[static_cast<std::size_t>(x)] = occ[static_cast<std::size_t>((ny - 1) * nx + x)] = 1;
  for (int y = 0; y < ny; ++y) occ[static_cast<std::size_t>(y * nx)] = occ[static_cast<std::size_t>(y * nx + nx - 1)] = 1;
  for (auto c : extra) occ[static_cast<std::size_t>(c.y * nx + c.x)] = 1;
  return sim::StaticMap(res, nx, ny, std::move(occ), {});
}

Agent walker(Vec2 pos, Vec2 goal, double speed) {
  Agent a;
  a.position = pos;
  a.waypoints = {goal};
  a.desired_speed = speed;
  return a;
}

}  // namespace

TEST(SocialForce, EquilibriumAtDesiredVelocity) {
  const auto map = room(20, 20);
  Rng rng(1);
  std::vector<Agent> agents{walker({10, 10}, {15, 10}, 1.0)};
  agents[0].velocity = {1.0, 0.0};
  const Vec2 f = social_force(agents, 0, std::nullopt, map, {}, rng);
  EXPECT_NEAR(f.x, 0.0, 1e-12);
  EXPECT_NEAR(f.y, 0.0, 1e-12);
}

TEST(SocialForce, DrivingTermFromRest) {
  const auto map = room(20, 20);
  Rng rng(1);
  std::vector<Agent> agents{walker({10, 10}, {15, 10}, 1.0)};
  const Vec2 f = social_force(agents, 0, std::nullopt, map, {}, rng);
  EXPECT_NEAR(f.x, 2.0, 1e-12);
  EXPECT_NEAR(f.y, 0.0, 1e-12);
}

TEST(SocialForce, MirrorSymmetricPair) {
  const auto map = room(20, 20);
  Rng rng(1);
  std::vector<Agent> agents{walker({9.2, 10.3}, {5, 12}, 0.9), walker({10.8, 10.3}, {15, 12}, 0.9)};
  agents[0].velocity = {-0.3, 0.1};
  agents[1].velocity = {0.3, 0.1};
  const Vec2 f0 = social_force(agents, 0, std::nullopt, map, {}, rng);
  const Vec2 f1 = social_force(agents, 1, std::nullopt, map, {}, rng);
  EXPECT_NEAR(f0.x, -f1.x, 1e-12);
  EXPECT_NEAR(f0.y, f1.y, 1e-12);
}

TEST(SocialForce, RepulsionMatchesExponentialLaw) {
  const auto map = room(20, 20);
  Rng rng(1);
  SocialForceParams p;
  std::vector<Agent> agents{walker({10, 10}, {10, 10}, 1.0), walker({10.9, 10}, {10.9, 10}, 1.0)};
  const Vec2 f = social_force(agents, 0, std::nullopt, map, p, rng);
  EXPECT_NEAR(f.x, -p.repulsion_strength * std::exp((0.6 - 0.9) / p.repulsion_range), 1e-12);
  EXPECT_NEAR(f.y, 0.0, 1e-12);
}

TEST(SocialForce, CoincidentAgentsGetCappedRandomPush) {
  const auto map = room(20, 20);
  Rng rng(3);
  SocialForceParams p;
  std::vector<Agent> agents{walker({10, 10}, {10, 10}, 1.0), walker({10, 10}, {10, 10}, 1.0)};
  const Vec2 f = social_force(agents, 0, std::nullopt, map, p, rng);
  EXPECT_NEAR(f.norm(), p.repulsion_strength * std::exp(0.6 / p.repulsion_range), 1e-9);
}

TEST(SocialForce, WallPushesAway) {
  const auto map = room(20, 20);
  Rng rng(1);
  std::vector<Agent> agents{walker({0.5, 10}, {0.5, 10}, 1.0)};
  const Vec2 f = social_force(agents, 0, std::nullopt, map, {}, rng);
  EXPECT_GT(f.x, 0.0);
}

TEST(StepAgents, StaticsWithoutForce) {
  const auto map = room(20, 20);
  Rng rng(1);
  std::vector<Agent> agents{walker({10, 10}, {10, 10}, 1.0)};
  step_agents(agents, std::nullopt, map, {}, 0.1, rng);
  EXPECT_EQ(agents[0].position, (Vec2{10, 10}));
}

TEST(StepAgents, ArrivesWithinKinematicBound) {
  const auto map = room(20, 6);
  Rng rng(1);
  std::vector<Agent> agents{walker({2, 3}, {16, 3}, 1.0)};
  agents[0].waypoints.push_back({2, 3});
  const double path = 14.0;
  int ticks = 0;
  while (agents[0].next_waypoint == 0 && ticks < 1000) {
    step_agents(agents, std::nullopt, map, {}, 0.1, rng);
    ++ticks;
  }
  // Popped within 0.3 m of the goal.
  const double t = ticks * 0.1;
  EXPECT_NEAR(t, (path - 0.3) / 1.0, 0.1 * path / 1.0);
}

TEST(StepAgents, DeviatesAroundParkedRobot) {
  const auto map = room(20, 6);
  Rng rng(1), rng2(1);
  std::vector<Agent> free_run{walker({2, 3.05}, {18, 3.05}, 1.0)};
  std::vector<Agent> blocked = free_run;
  const sim::Disc robot{{10, 3.0}, 0.25};
  double min_gap = 1e9, max_dev = 0.0;
  for (int t = 0; t < 200; ++t) {
    step_agents(free_run, std::nullopt, map, {}, 0.1, rng);
    step_agents(blocked, robot, map, {}, 0.1, rng2);
    min_gap = std::min(min_gap, (blocked[0].position - robot.center).norm() - 0.25 - blocked[0].radius);
    max_dev = std::max(max_dev, (blocked[0].position - free_run[0].position).norm());
  }
  EXPECT_GT(min_gap, 0.0);
  EXPECT_GT(max_dev, 0.2);
}

TEST(StepAgents, InvariantsUnderCrowding) {
  std::vector<sim::Cell> pillars;
  for (int x = 40; x < 45; ++x)
    for (int y = 25; y < 30; ++y) pillars.push_back({x, y});
  const auto map = room(10, 6, 0.1, pillars);
  Rng rng(7);
  std::vector<Agent> agents;
  const Vec2 corners[] = {{1, 1}, {9, 5}, {1, 5}, {9, 1}, {5, 1}, {5, 5}};
  for (int i = 0; i < 6; ++i) {
    Agent a;
    a.position = corners[i];
    a.waypoints = {corners[(i + 1) % 6], corners[(i + 3) % 6]};
    a.desired_speed = uniform(rng, 0.6, 1.2);
    agents.push_back(a);
  }
  const sim::Disc robot{{3.0, 3.0}, 0.25};
  SocialForceParams p;
  for (int t = 0; t < 1500; ++t) {
    step_agents(agents, robot, map, p, 0.1, rng);
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const auto& a = agents[i];
      ASSERT_LE(a.velocity.norm(), p.speed_cap_factor * a.desired_speed + 1e-12);
      const auto hit = map.nearest_obstacle(a.position, 1.0);
      if (hit) {
        ASSERT_GE(hit->distance, a.radius - map.resolution());
      }
      for (std::size_t j = i + 1; j < agents.size(); ++j) {
        ASSERT_GE((a.position - agents[j].position).norm(), a.radius + agents[j].radius - map.resolution());
      }
      ASSERT_GE((a.position - robot.center).norm(), a.radius + robot.radius - map.resolution());
    }
  }
}

TEST(StepAgents, NoCouplingWithoutRobot) {
  const auto map = room(20, 6);
  auto run = [&](double robot_speed) {
    Rng rng(5);
    sim::RobotState robot{{10, 1.0, 0.0}, {}};
    std::vector<Agent> agents{walker({2, 3}, {18, 3}, 1.0), walker({18, 3.2}, {2, 3}, 0.8)};
    for (int t = 0; t < 100; ++t) {
      robot = sim::step_robot(map, {}, robot, {robot_speed, 0.3}, 0.1).state;
      step_agents(agents, std::nullopt, map, {}, 0.1, rng);
    }
    return agents[0].position;
  };
  EXPECT_EQ(run(0.0), run(0.5));
}

TEST(Scenario, ParsesAndValidates) {
  const auto s = parse_scenario(R"({
    "name": "t", "map": "m.map",
    "robot_routes": [{"start": [1, 2, 0.5], "goal": [5, 6]}],
    "agents": [{"start": [1, 1], "waypoints": [[2, 2], [3, 3]], "desired_speed": 0.8}],
    "social_force": {"tau": 0.4}
  })");
  EXPECT_EQ(s.robot_routes.size(), 1u);
  EXPECT_DOUBLE_EQ(s.robot_routes[0].start.heading, 0.5);
  EXPECT_DOUBLE_EQ(*s.agents[0].desired_speed, 0.8);
  EXPECT_DOUBLE_EQ(s.social_force.relaxation_time, 0.4);
  EXPECT_THROW(parse_scenario(R"({"map": "m", "robot_routes": [], "agents": []})"), ConfigError);
  EXPECT_THROW(parse_scenario(R"({"map": "m", "robot_routes": [{"start":[0,0,0],"goal":[1,1]}], "agents": [], "bogus": 1})"),
               ConfigError);
  EXPECT_THROW(parse_scenario(R"({"map": "m", "robot_routes": [{"start":[0,0,0],"goal":[1,1]}], "agents": [],
                                   "social_force": {"A": -1}})"),
               ConfigError);
}
