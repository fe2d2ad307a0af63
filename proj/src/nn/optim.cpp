#include "ptdrl/nn/optim.hpp"

#include <algorithm>
#include <cmath>

namespace ptdrl::nn {

AdamState make_adam_state(std::span<Param* const> params, AdamHyper hyper) {
  AdamState s;
  s.hyper = hyper;
  for (const auto* p : params) {
    s.first_moment.emplace_back(p->value.shape());
    s.second_moment.emplace_back(p->value.shape());
  }
  return s;
}

void adam_step(std::span<Param* const> params, std::span<const Tensor> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw ConfigError("adam_step: parameter, gradient and moment counts differ");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (grads[k].shape() != params[k]->value.shape() || state.first_moment[k].shape() != params[k]->value.shape()) {
      throw ConfigError("adam_step: shape mismatch for '" + params[k]->name + "'");
    }
    if (!grads[k].all_finite()) throw TrainingError("non-finite gradient for parameter '" + params[k]->name + "'");
  }
  ++state.step_count;
  const auto& h = state.hyper;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(h.beta1, t);
  const double bc2 = 1.0 - std::pow(h.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& w = params[k]->mutate().storage();
    const auto& g = grads[k].storage();
    auto& m = state.first_moment[k].storage();
    auto& v = state.second_moment[k].storage();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
      v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= h.lr * mhat / (std::sqrt(vhat) + h.eps);
    }
  }
}

void adam_step(std::span<Param* const> params, AdamState& state) {
  std::vector<Tensor> grads;
  grads.reserve(params.size());
  for (const auto* p : params) grads.push_back(p->grad);
  adam_step(params, grads, state);
}

double clip_grad_norm(std::span<Param* const> params, double max_norm) {
  double sq = 0.0;
  for (const auto* p : params) {
    for (double g : p->grad.storage()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (auto* p : params) {
      for (double& g : p->grad.storage()) g *= s;
    }
  }
  return norm;
}

GradCheckResult grad_check(std::span<Param* const> params, const std::function<double(bool)>& loss,
                           double epsilon) {
  zero_grads(params);
  loss(true);
  std::vector<Tensor> analytic;
  for (const auto* p : params) analytic.push_back(p->grad);

  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (std::size_t i = 0; i < params[k]->value.size(); ++i) {
      const double original = params[k]->value[i];
      params[k]->mutate()[i] = original + epsilon;
      const double up = loss(false);
      params[k]->mutate()[i] = original - epsilon;
      const double down = loss(false);
      params[k]->mutate()[i] = original;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
      const double rel = std::abs(a - numeric) / denom;
      if (rel > result.max_relative_error) {
        result = {rel, params[k]->name, i, a, numeric};
      }
    }
  }
  zero_grads(params);
  return result;
}

}  // namespace ptdrl::nn
