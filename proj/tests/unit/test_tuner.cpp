#include <gtest/gtest.h>

#include <cmath>
#include <utility>

#include "ptdrl/planner/params.hpp"
#include "ptdrl/tuner/dqn.hpp"
#include "ptdrl/tuner/replay.hpp"
#include "ptdrl/tuner/reward.hpp"

using namespace ptdrl;
using namespace ptdrl::tuner;
using nn::Tensor;

namespace {

const std::string kData = PTDRL_DATA_DIR;

Transition dummy(std::size_t state_size, std::uint32_t action, double reward, Rng& rng) {
  Transition t;
  for (std::size_t i = 0; i < state_size; ++i) {
    t.state.push_back(static_cast<float>(gaussian(rng)));
    t.next_state.push_back(static_cast<float>(gaussian(rng)));
  }
  t.action = action;
  t.reward = reward;
  return t;
}

// Sample counts over many draws.
std::vector<int> histogram(const PrioritizedReplay& buf, int draws, Rng& rng) {
  std::vector<int> h(buf.size(), 0);
  for (int i = 0; i < draws; ++i) ++h[buf.sample(1, 0.4, rng).indices[0]];
  return h;
}

}  // namespace

TEST(Reward, Examples) {
  RewardConfig w1;
  RewardConfig w2;
  w2.w = 2.0;
  EXPECT_NEAR(compute_reward(0.0, w1, 0.1), -1.59, 1e-12);
  EXPECT_NEAR(compute_reward(0.0, w2, 3.0), -1.59, 1e-12);
  EXPECT_NEAR(compute_reward(1.0, w1, 2.0), -0.59, 1e-12);
  EXPECT_NEAR(compute_reward(1.0, w2, 0.5), -3.59, 1e-12);
}

TEST(Reward, NeverPositiveUnderFuzz) {
  Rng rng(1);
  RewardConfig cfg;
  for (int i = 0; i < 1000000; ++i) {
    cfg.w = uniform(rng, 0.01, 5.0);
    const double v = uniform(rng, 0.0, cfg.maxvelrob);
    const double m = uniform(rng, 0.0, 3.0);
    const double r = compute_reward(v, cfg, m);
    ASSERT_LE(r, 0.0);
    if (v < cfg.maxvelrob || m < cfg.d) {
      ASSERT_LT(r, 0.0);
    }
  }
  EXPECT_EQ(compute_reward(cfg.maxvelrob, cfg, cfg.d), 0.0);
}

TEST(QNet, OutputWidthFollowsParameterFile) {
  Rng rng(2);
  for (const char* f : {"/params/ptdrl4.json", "/params/ptdrl8.json"}) {
    const auto sets = planner::load_parameter_sets(kData + f);
    QNetwork net(sets.size());
    net.init(rng);
    std::vector<double> s(kStateSize, 0.1);
    EXPECT_EQ(q_forward(net, s).size(), sets.size());
    EXPECT_EQ(q_forward(net, s), q_forward(net, s));
  }
  QNetwork net(4);
  EXPECT_THROW(q_forward(net, std::vector<double>(290, 0.0)), ConfigError);
}

TEST(QNet, ZeroWeightsGiveBias) {
  QNetwork net(4);
  for (auto* p : net.params()) p->mutate().fill(0.0);
  auto params = net.params();
  const std::vector<double> b{0.5, -1, 2, 3};
  for (std::size_t i = 0; i < 4; ++i) params.back()->mutate()[i] = b[i];
  Rng rng(3);
  std::vector<double> s(kStateSize);
  for (auto& v : s) v = gaussian(rng);
  EXPECT_EQ(q_forward(net, s), b);
}

TEST(QNet, ArgmaxInvariantToBiasShift) {
  Rng rng(4);
  QNetwork net(8);
  net.init(rng);
  std::vector<std::vector<double>> states(50, std::vector<double>(kStateSize));
  for (auto& s : states)
    for (auto& v : s) v = gaussian(rng);
  std::vector<std::size_t> before;
  for (const auto& s : states) before.push_back(argmax(q_forward(net, s)));
  auto& bias = *net.params().back();
  for (auto& v : bias.mutate().storage()) v += 7.25;
  for (std::size_t i = 0; i < states.size(); ++i) EXPECT_EQ(argmax(q_forward(net, states[i])), before[i]);
}

TEST(SelectAction, GreedyAndTies) {
  Rng rng(5);
  EXPECT_EQ(select_action(std::vector<double>{1, 3, 2, 0}, 0.0, rng), 1u);
  EXPECT_EQ(select_action(std::vector<double>{5, 5, 0, 0}, 0.0, rng), 0u);
}

TEST(SelectAction, UniformWhenFullyRandom) {
  Rng rng(6);
  const int n = 10000;
  std::vector<int> counts(4, 0);
  for (int i = 0; i < n; ++i) ++counts[select_action(std::vector<double>{9, 1, 1, 1}, 1.0, rng)];
  const double p = 0.25, sd = std::sqrt(n * p * (1 - p));
  for (int c : counts) EXPECT_NEAR(c, n * p, 3 * sd);
}

TEST(Ddqn, Targets) {
  const Tensor on({1, 2}, {1, 2}), tg({1, 2}, {10, -10});
  EXPECT_DOUBLE_EQ(ddqn_targets(std::vector<double>{0.0}, std::vector<std::uint8_t>{0}, on, tg, 0.99)[0], -9.9);
  EXPECT_EQ(ddqn_targets(std::vector<double>{-1.0}, std::vector<std::uint8_t>{1}, on, tg, 0.99)[0], -1.0);
  EXPECT_EQ(ddqn_targets(std::vector<double>{-0.3}, std::vector<std::uint8_t>{0}, on, tg, 0.0)[0], -0.3);
}

TEST(Per, EqualPrioritiesSampleUniformlyWithUnitWeights) {
  Rng rng(7);
  PrioritizedReplay buf({4, 0.6, 1e-2});
  for (int i = 0; i < 4; ++i) buf.add(dummy(2, 0, 0, rng));
  for (int k = 0; k < 16; ++k) {
    for (double w : buf.sample(4, 0.4, rng).weights) EXPECT_EQ(w, 1.0);
  }
  const auto h = histogram(buf, 10000, rng);
  const double sd = std::sqrt(10000 * 0.25 * 0.75);
  for (int c : h) EXPECT_NEAR(c, 2500, 3 * sd);
}

TEST(Per, AlphaZeroIgnoresPriorities) {
  Rng rng(8);
  PrioritizedReplay buf({2, 0.0, 1e-2});
  buf.add(dummy(2, 0, 0, rng));
  buf.add(dummy(2, 0, 0, rng));
  const std::vector<std::size_t> idx{0, 1};
  buf.update(idx, std::vector<double>{100.0, 0.0});
  const auto h = histogram(buf, 10000, rng);
  EXPECT_NEAR(h[0], 5000, 3 * std::sqrt(2500.0));
}

TEST(Per, ProportionalThreeToOne) {
  Rng rng(9);
  PrioritizedReplay buf({2, 1.0, 1e-2});
  buf.add(dummy(2, 0, 0, rng));
  buf.add(dummy(2, 0, 0, rng));
  const std::vector<std::size_t> idx{0, 1};
  buf.update(idx, std::vector<double>{3.0 - 1e-2, 1.0 - 1e-2});
  EXPECT_NEAR(buf.priority(0), 3.0, 1e-12);
  EXPECT_NEAR(buf.priority(1), 1.0, 1e-12);
  const int n = 10000;
  const auto h = histogram(buf, n, rng);
  EXPECT_NEAR(h[0], 0.75 * n, 3 * std::sqrt(n * 0.75 * 0.25));
  // Importance weights: (N P)^-beta normalized by the max.
  int mixed = 0;
  for (int k = 0; k < 50; ++k) {
    const auto b = buf.sample(2, 1.0, rng);
    if (b.indices[0] == b.indices[1]) continue;
    ++mixed;
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(b.weights[j], b.indices[j] == 0 ? 1.0 / 3.0 : 1.0, 1e-12);
  }
  EXPECT_GT(mixed, 0);
}

TEST(Per, UpdateRules) {
  Rng rng(10);
  PrioritizedReplay buf({8, 0.6, 1e-2});
  for (int i = 0; i < 5; ++i) buf.add(dummy(2, 0, 0, rng));
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(buf.priority(i), 1.0);
  const std::vector<std::size_t> idx{1, 3};
  buf.update(idx, std::vector<double>{0.0, -1.0});
  EXPECT_NEAR(buf.priority(1), std::pow(1e-2, 0.6), 1e-15);
  EXPECT_NEAR(buf.priority(3), std::pow(1.01, 0.6), 1e-15);
  for (std::size_t i : {0u, 2u, 4u}) EXPECT_EQ(buf.priority(i), 1.0);
  // New entries come in at the running maximum.
  buf.add(dummy(2, 0, 0, rng));
  EXPECT_NEAR(buf.priority(5), std::pow(1.01, 0.6), 1e-15);
}

TEST(Per, EmptyBufferIsAnError) {
  Rng rng(11);
  PrioritizedReplay buf({4, 0.6, 1e-2});
  EXPECT_THROW(buf.sample(1, 0.4, rng), SamplingError);
}

TEST(TdLoss, GradCheckFiveTransitions) {
  Rng rng(12);
  QNetwork net(3, 6, 5);
  net.init(rng);
  Tensor states({5, 6});
  for (auto& v : states.storage()) v = gaussian(rng);
  const std::vector<std::size_t> actions{0, 2, 1, 2, 0};
  // Mix of quadratic and linear Huber regions, away from the kink.
  const auto q = net.forward(states);
  std::vector<double> targets;
  const double offsets[] = {0.3, -2.5, 0.6, 4.0, -0.2};
  for (std::size_t i = 0; i < 5; ++i) targets.push_back(q.at(i, actions[i]) + offsets[i]);
  const std::vector<double> weights{1.0, 0.5, 0.25, 0.8, 0.9};
  auto params = net.params();
  const auto r = nn::grad_check(params, [&](bool bw) { return td_loss(net, states, actions, targets, weights, bw); });
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_param;
}

TEST(Learner, TargetSyncIsBitExact) {
  Rng rng(13);
  DqnHyper h;
  h.batch = 4;
  h.target_sync = 3;
  h.replay.capacity = 64;
  DqnLearner learner(4, h, rng);
  auto same = [&] {
    const auto a = std::as_const(learner).online().params();
    const auto b = learner.target().params();
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!(a[i]->value == b[i]->value)) return false;
    return true;
  };
  EXPECT_TRUE(same());
  for (int i = 0; i < 16; ++i) learner.remember(dummy(kStateSize, static_cast<std::uint32_t>(i % 4), -1.0, rng));
  learner.learn(0.4, rng);
  EXPECT_FALSE(same());
  learner.learn(0.4, rng);
  learner.learn(0.4, rng);
  EXPECT_TRUE(same());
}
