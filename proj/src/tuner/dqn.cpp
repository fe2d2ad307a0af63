#include "ptdrl/tuner/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ptdrl/json_util.hpp"
#include "ptdrl/nn/checkpoint.hpp"

namespace ptdrl::tuner {

using nn::Tensor;

std::vector<double> make_state(std::span<const double> z, std::span<const double> h, double linear, double angular) {
  std::vector<double> s;
  s.reserve(z.size() + h.size() + 2);
  s.insert(s.end(), z.begin(), z.end());
  s.insert(s.end(), h.begin(), h.end());
  s.push_back(linear);
  s.push_back(angular);
  return s;
}

QNetwork::QNetwork(std::size_t n_actions, std::size_t state_size, std::size_t width)
    : mlp_("q", state_size,
           {{width, nn::Activation::relu}, {width, nn::Activation::relu}, {n_actions, nn::Activation::identity}}) {
  if (n_actions == 0) throw ConfigError("q network: need at least one action");
}

Tensor QNetwork::forward(const Tensor& state, nn::MlpTrace* trace) const {
  if (state.cols() != state_size()) {
    throw ConfigError("q network: expected state width " + std::to_string(state_size()) + ", got " +
                      std::to_string(state.cols()));
  }
  return mlp_.forward(state, trace);
}

void QNetwork::copy_from(const QNetwork& other) {
  auto mine = params();
  const auto theirs = other.params();
  if (mine.size() != theirs.size()) throw ConfigError("q network: architecture mismatch");
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (mine[i]->value.shape() != theirs[i]->value.shape()) throw ConfigError("q network: architecture mismatch");
    mine[i]->mutate() = theirs[i]->value;
  }
}

std::vector<double> q_forward(const QNetwork& net, std::span<const double> state) {
  const Tensor q = net.forward(Tensor::vector(state));
  return {q.storage().begin(), q.storage().end()};
}

std::size_t argmax(std::span<const double> q) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < q.size(); ++i) {
    if (q[i] > q[best]) best = i;
  }
  return best;
}

std::size_t select_action(std::span<const double> q, double epsilon, Rng& rng) {
  if (q.empty()) throw ConfigError("select_action: empty Q vector");
  if (uniform(rng, 0.0, 1.0) < epsilon) return uniform_index(rng, q.size());
  return argmax(q);
}

std::vector<double> ddqn_targets(std::span<const double> rewards, std::span<const std::uint8_t> done,
                                 const Tensor& q_online_next, const Tensor& q_target_next, double gamma) {
  const std::size_t n_a = q_online_next.cols();
  std::vector<double> y(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    if (done[i]) {
      y[i] = rewards[i];
      continue;
    }
    const std::span<const double> row = q_online_next.data().subspan(i * n_a, n_a);
    y[i] = rewards[i] + gamma * q_target_next.at(i, argmax(row));
  }
  return y;
}

double huber(double x, double delta) {
  const double a = std::abs(x);
  return a <= delta ? 0.5 * x * x : delta * (a - 0.5 * delta);
}

double huber_grad(double x, double delta) { return std::clamp(x, -delta, delta); }

double td_loss(QNetwork& net, const Tensor& states, std::span<const std::size_t> actions, std::span<const double> targets,
               std::span<const double> weights, bool backward, std::vector<double>* td_errors) {
  nn::MlpTrace trace;
  const Tensor q = net.forward(states, backward ? &trace : nullptr);
  const std::size_t b = q.rows(), n_a = q.cols();
  Tensor dq({b, n_a});
  double loss = 0.0;
  if (td_errors) td_errors->resize(b);
  for (std::size_t i = 0; i < b; ++i) {
    const double delta = q.at(i, actions[i]) - targets[i];
    if (td_errors) (*td_errors)[i] = delta;
    loss += weights[i] * huber(delta);
    dq.at(i, actions[i]) = weights[i] * huber_grad(delta) / static_cast<double>(b);
  }
  loss /= static_cast<double>(b);
  if (backward) net.backward(trace, dq);
  return loss;
}

DqnLearner::DqnLearner(std::size_t n_actions, const DqnHyper& hyper, Rng& init_rng)
    : hyper_(hyper), online_(n_actions), target_(n_actions), replay_(hyper.replay) {
  online_.init(init_rng);
  target_.copy_from(online_);
  auto p = online_.params();
  adam_ = nn::make_adam_state(p, {hyper.lr});
}

LearnStats DqnLearner::learn(double beta, Rng& rng) {
  const auto batch = replay_.sample(hyper_.batch, beta, rng);
  const std::size_t b = batch.indices.size(), s = online_.state_size();
  Tensor states({b, s}), next({b, s});
  std::vector<double> rewards(b);
  std::vector<std::uint8_t> done(b);
  std::vector<std::size_t> actions(b);
  for (std::size_t i = 0; i < b; ++i) {
    const auto& t = replay_.at(batch.indices[i]);
    std::copy(t.state.begin(), t.state.end(), states.storage().begin() + static_cast<std::ptrdiff_t>(i * s));
    std::copy(t.next_state.begin(), t.next_state.end(), next.storage().begin() + static_cast<std::ptrdiff_t>(i * s));
    rewards[i] = t.reward;
    done[i] = t.done;
    actions[i] = t.action;
  }
  const auto y = ddqn_targets(rewards, done, online_.forward(next), target_.forward(next), hyper_.gamma);

  auto params = online_.params();
  nn::zero_grads(params);
  std::vector<double> td;
  LearnStats stats;
  stats.loss = td_loss(online_, states, actions, y, batch.weights, true, &td);
  for (std::size_t i = 0; i < b; ++i) stats.mean_q += (td[i] + y[i]) / static_cast<double>(b);
  if (hyper_.grad_clip > 0) nn::clip_grad_norm(params, hyper_.grad_clip);
  nn::adam_step(params, adam_);
  replay_.update(batch.indices, td);
  if (++learn_steps_ % hyper_.target_sync == 0) sync_target();
  return stats;
}

void save_qnetwork(const std::filesystem::path& path, const QNetwork& net) {
  auto meta = path;
  meta += ".json";
  std::ofstream os(meta);
  if (!os) throw RuntimeError("cannot write " + meta.string());
  os << json_util::Json{{"n_actions", net.n_actions()}, {"state_size", net.state_size()}}.dump(2) << "\n";
  nn::save_checkpoint(path, net.params());
}

QNetwork load_qnetwork(const std::filesystem::path& path) {
  auto meta = path;
  meta += ".json";
  const auto j = json_util::load(meta);
  json_util::check_keys(j, "q network config", {"n_actions", "state_size"}, {"n_actions", "state_size"});
  QNetwork net(json_util::get<std::size_t>(j, "n_actions", "q network config"),
               json_util::get<std::size_t>(j, "state_size", "q network config"));
  auto p = net.params();
  nn::load_checkpoint(path, p);
  return net;
}

}  // namespace ptdrl::tuner
