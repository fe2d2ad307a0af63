#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ptdrl/nn/layers.hpp"

namespace ptdrl::nn {

class TrainingError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::uint64_t step_count = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  AdamHyper hyper;
};

AdamState make_adam_state(std::span<Param* const> params, AdamHyper hyper);

/// Bias-corrected Adam update of `params` with explicit gradients.
void adam_step(std::span<Param* const> params, std::span<const Tensor> grads, AdamState& state);
/// Same, reading each parameter's accumulated grad.
void adam_step(std::span<Param* const> params, AdamState& state);

/// Rescales accumulated gradients so their global L2 norm is at most `max_norm`. Returns the norm before clipping.
double clip_grad_norm(std::span<Param* const> params, double max_norm);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Compares analytic gradients against central differences for every element
/// of every parameter. `loss(true)` must run forward and backward, accumulating
/// into the parameters' grads; `loss(false)` only evaluates.
/// The relative error uses max(|analytic|, |numeric|, 1e-6) as denominator.
GradCheckResult grad_check(std::span<Param* const> params, const std::function<double(bool)>& loss,
                           double epsilon = 1e-5);

}  // namespace ptdrl::nn
