#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ptdrl/nn/tensor.hpp"

namespace ptdrl::nn {

/// Raised when backward() is handed a trace recorded before a parameter changed.
class StaleTraceError : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

/// A trainable tensor with its gradient accumulator. Every mutation through
/// mutate() bumps the version so that old traces can be detected.
struct Param {
  Param() = default;
  Param(std::string name, Shape shape);

  Tensor& mutate() {
    ++version;
    return value;
  }
  void zero_grad() { grad.fill(0.0); }

  std::string name;
  Tensor value;
  Tensor grad;
  std::uint64_t version = 0;
};

struct ParamStamp {
  const Param* param = nullptr;
  std::uint64_t version = 0;
};

ParamStamp stamp(const Param& p);
void require_fresh(std::span<const ParamStamp> stamps);

enum class Activation { identity, relu, tanh, sigmoid, softmax, exp };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);

/// Applies `a` elementwise (softmax: per row).
Tensor activate(Activation a, const Tensor& pre);
/// Gradient w.r.t. the pre-activation given the activation output and upstream gradient.
Tensor activation_backward(Activation a, const Tensor& out, const Tensor& dy);

struct DenseTrace {
  Tensor input;
  Tensor output;
  std::array<ParamStamp, 2> stamps;
};

/// y = act(x W^T + b), W stored [out x in].
class Dense {
 public:
  Dense() = default;
  Dense(std::string name, std::size_t in, std::size_t out, Activation act);

  std::size_t in_features() const { return in_; }
  std::size_t out_features() const { return out_; }
  Activation activation() const { return act_; }

  void init_glorot(Rng& rng);

  /// Accepts [in] or [batch x in]; output rank follows the input.
  Tensor forward(const Tensor& x, DenseTrace* trace = nullptr) const;
  /// Accumulates into weight.grad and bias.grad; returns d loss / d input.
  Tensor backward(const DenseTrace& trace, const Tensor& dy);

  std::vector<Param*> params() { return {&weight, &bias}; }
  std::vector<const Param*> params() const { return {&weight, &bias}; }

  Param weight;
  Param bias;

 private:
  std::size_t in_ = 0;
  std::size_t out_ = 0;
  Activation act_ = Activation::identity;
};

struct LayerSpec {
  std::size_t out;
  Activation act;
};

struct MlpTrace {
  std::vector<DenseTrace> layers;
};

class Mlp {
 public:
  Mlp() = default;
  Mlp(const std::string& name, std::size_t in, const std::vector<LayerSpec>& layers);

  std::size_t in_features() const;
  std::size_t out_features() const;

  void init_glorot(Rng& rng);
  Tensor forward(const Tensor& x, MlpTrace* trace = nullptr) const;
  Tensor backward(const MlpTrace& trace, const Tensor& dy);

  std::vector<Param*> params();
  std::vector<const Param*> params() const;

  std::vector<Dense> layers;
};

struct Conv2dTrace {
  Tensor columns;  // im2col patches, [batch*out_h*out_w x in_ch*k*k]
  Tensor output;
  std::size_t batch = 0;
  std::array<ParamStamp, 2> stamps;
};

/// Square-kernel 2D convolution with stride and zero padding over
/// channel-major images flattened to [batch x ch*h*w].
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::string name, std::size_t in_channels, std::size_t out_channels, std::size_t in_size,
         std::size_t kernel, std::size_t stride, std::size_t padding, Activation act);

  std::size_t in_features() const { return in_ch_ * in_size_ * in_size_; }
  std::size_t out_features() const { return out_ch_ * out_size_ * out_size_; }
  std::size_t out_size() const { return out_size_; }

  void init_glorot(Rng& rng);
  Tensor forward(const Tensor& x, Conv2dTrace* trace = nullptr) const;
  Tensor backward(const Conv2dTrace& trace, const Tensor& dy);

  std::vector<Param*> params() { return {&weight, &bias}; }
  std::vector<const Param*> params() const { return {&weight, &bias}; }

  Param weight;  // [out_ch x in_ch*k*k]
  Param bias;    // [out_ch]

 private:
  Tensor im2col(const Tensor& x, std::size_t batch) const;

  std::size_t in_ch_ = 0, out_ch_ = 0, in_size_ = 0, kernel_ = 0, stride_ = 1, padding_ = 0, out_size_ = 0;
  Activation act_ = Activation::identity;
};

struct LstmState {
  Tensor h;  // [batch x hidden]
  Tensor c;  // [batch x hidden]
};

struct LstmStepTrace {
  Tensor x;
  Tensor h_prev;
  Tensor c_prev;
  Tensor gates;  // post-activation [batch x 4*hidden], order i f g o
  Tensor c;
  Tensor tanh_c;
  std::array<ParamStamp, 3> stamps;
};

struct LstmStepGrad {
  Tensor dx;
  Tensor dh_prev;
  Tensor dc_prev;
};

/// Single-layer LSTM cell.
class Lstm {
 public:
  Lstm() = default;
  Lstm(const std::string& name, std::size_t in, std::size_t hidden);

  std::size_t in_features() const { return in_; }
  std::size_t hidden_size() const { return hidden_; }

  /// Glorot input weights, orthogonal recurrent weights (QR of a Gaussian matrix), zero bias.
  void init(Rng& rng);
  LstmState zero_state(std::size_t batch) const;
  LstmState step(const Tensor& x, const LstmState& state, LstmStepTrace* trace = nullptr) const;
  /// dh, dc: gradients w.r.t. this step's output h and c.
  LstmStepGrad backward_step(const LstmStepTrace& trace, const Tensor& dh, const Tensor& dc);

  std::vector<Param*> params() { return {&w_input, &w_recurrent, &bias}; }
  std::vector<const Param*> params() const { return {&w_input, &w_recurrent, &bias}; }

  Param w_input;      // [4H x in]
  Param w_recurrent;  // [4H x H]
  Param bias;         // [4H]

 private:
  std::size_t in_ = 0;
  std::size_t hidden_ = 0;
};

void zero_grads(std::span<Param* const> params);

/// Fills a [rows x cols] tensor with an orthogonal matrix from QR of a Gaussian.
Tensor orthogonal(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace ptdrl::nn
