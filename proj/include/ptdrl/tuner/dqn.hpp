#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "ptdrl/nn/layers.hpp"
#include "ptdrl/nn/optim.hpp"
#include "ptdrl/tuner/replay.hpp"

namespace ptdrl::tuner {

inline constexpr std::size_t kLatentSize = 64;
inline constexpr std::size_t kHiddenSize = 256;
inline constexpr std::size_t kVelocitySize = 2;
inline constexpr std::size_t kStateSize = kLatentSize + kHiddenSize + kVelocitySize;

/// [z, h, v] flattened.
std::vector<double> make_state(std::span<const double> z, std::span<const double> h, double linear, double angular);

/// 322 -> 128 -> 128 -> N_a, relu hidden, identity output.
class QNetwork {
 public:
  QNetwork() = default;
  QNetwork(std::size_t n_actions, std::size_t state_size = kStateSize, std::size_t width = 128);

  std::size_t n_actions() const { return mlp_.out_features(); }
  std::size_t state_size() const { return mlp_.in_features(); }
  void init(Rng& rng) { mlp_.init_glorot(rng); }

  /// state: [state_size] or [batch x state_size].
  nn::Tensor forward(const nn::Tensor& state, nn::MlpTrace* trace = nullptr) const;
  nn::Tensor backward(const nn::MlpTrace& trace, const nn::Tensor& dq) { return mlp_.backward(trace, dq); }

  std::vector<nn::Param*> params() { return mlp_.params(); }
  std::vector<const nn::Param*> params() const { return mlp_.params(); }
  /// Copies parameter values bit-exactly from `other`.
  void copy_from(const QNetwork& other);

 private:
  nn::Mlp mlp_;
};

std::vector<double> q_forward(const QNetwork& net, std::span<const double> state);

/// Lowest index among the maxima.
std::size_t argmax(std::span<const double> q);

/// Always draws one uniform; below epsilon a second draw picks the action uniformly.
std::size_t select_action(std::span<const double> q, double epsilon, Rng& rng);

/// y = r when done, else r + gamma * Q_target(s', argmax_a Q_online(s', a)). Q tensors are [batch x N_a].
std::vector<double> ddqn_targets(std::span<const double> rewards, std::span<const std::uint8_t> done,
                                 const nn::Tensor& q_online_next, const nn::Tensor& q_target_next, double gamma);

double huber(double x, double delta = 1.0);
double huber_grad(double x, double delta = 1.0);

/// Weighted mean Huber loss of Q(s, a) against targets; accumulates gradients when
/// `backward` is set. Writes Q(s,a) - y into td_errors.
double td_loss(QNetwork& net, const nn::Tensor& states, std::span<const std::size_t> actions,
               std::span<const double> targets, std::span<const double> weights, bool backward,
               std::vector<double>* td_errors = nullptr);

struct DqnHyper {
  double gamma = 0.99;
  std::size_t batch = 64;
  double lr = 3e-4;
  std::size_t target_sync = 2000;  // learner steps
  double grad_clip = 10.0;         // 0 disables
  PerConfig replay;
};

struct LearnStats {
  double loss = 0.0;
  double mean_q = 0.0;
};

/// Online and target networks, Adam and the prioritized buffer.
class DqnLearner {
 public:
  DqnLearner(std::size_t n_actions, const DqnHyper& hyper, Rng& init_rng);

  const QNetwork& online() const { return online_; }
  const QNetwork& target() const { return target_; }
  QNetwork& online() { return online_; }
  PrioritizedReplay& replay() { return replay_; }
  std::size_t learn_steps() const { return learn_steps_; }
  const DqnHyper& hyper() const { return hyper_; }

  void remember(Transition t) { replay_.add(std::move(t)); }
  /// One prioritized minibatch update; syncs the target every target_sync steps.
  LearnStats learn(double beta, Rng& rng);
  void sync_target() { target_.copy_from(online_); }

 private:
  DqnHyper hyper_;
  QNetwork online_;
  QNetwork target_;
  nn::AdamState adam_;
  PrioritizedReplay replay_;
  std::size_t learn_steps_ = 0;
};

void save_qnetwork(const std::filesystem::path& path, const QNetwork& net);
QNetwork load_qnetwork(const std::filesystem::path& path);

}  // namespace ptdrl::tuner
