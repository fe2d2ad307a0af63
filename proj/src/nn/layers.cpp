#include "ptdrl/nn/layers.hpp"

#include <algorithm>
#include <cmath>

namespace ptdrl::nn {

Param::Param(std::string n, Shape shape) : name(std::move(n)), value(shape), grad(shape) {}

ParamStamp stamp(const Param& p) { return {&p, p.version}; }

void require_fresh(std::span<const ParamStamp> stamps) {
  for (const auto& s : stamps) {
    if (s.param != nullptr && s.param->version != s.version) {
      throw StaleTraceError("trace is stale: parameter '" + s.param->name + "' changed after the forward pass");
    }
  }
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::softmax: return "softmax";
    case Activation::exp: return "exp";
  }
  return "identity";
}

Activation activation_from_string(std::string_view s) {
  for (auto a : {Activation::identity, Activation::relu, Activation::tanh, Activation::sigmoid, Activation::softmax,
                 Activation::exp}) {
    if (to_string(a) == s) return a;
  }
  throw ConfigError("unknown activation '" + std::string(s) + "'");
}

Tensor activate(Activation a, const Tensor& pre) {
  Tensor out = pre;
  auto& v = out.storage();
  switch (a) {
    case Activation::identity: break;
    case Activation::relu:
      for (auto& x : v) x = x > 0.0 ? x : 0.0;
      break;
    case Activation::tanh:
      for (auto& x : v) x = std::tanh(x);
      break;
    case Activation::sigmoid:
      for (auto& x : v) x = 1.0 / (1.0 + std::exp(-x));
      break;
    case Activation::exp:
      for (auto& x : v) x = std::exp(x);
      break;
    case Activation::softmax: {
      auto m = out.matrix();
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const double mx = m.row(r).maxCoeff();
        m.row(r) = (m.row(r).array() - mx).exp();
        m.row(r) /= m.row(r).sum();
      }
      break;
    }
  }
  return out;
}

Tensor activation_backward(Activation a, const Tensor& out, const Tensor& dy) {
  Tensor da = dy;
  auto& g = da.storage();
  const auto& y = out.storage();
  switch (a) {
    case Activation::identity: break;
    case Activation::relu:
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = y[i] > 0.0 ? g[i] : 0.0;
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= 1.0 - y[i] * y[i];
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= y[i] * (1.0 - y[i]);
      break;
    case Activation::exp:
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= y[i];
      break;
    case Activation::softmax: {
      auto gm = da.matrix();
      const auto ym = out.matrix();
      for (Eigen::Index r = 0; r < gm.rows(); ++r) {
        const double s = gm.row(r).dot(ym.row(r));
        gm.row(r) = ym.row(r).array() * (gm.row(r).array() - s);
      }
      break;
    }
  }
  return da;
}

namespace {

void glorot_fill(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : t.storage()) v = uniform(rng, -limit, limit);
}

Shape batch_shape(const Tensor& x, std::size_t features) {
  if (x.rank() <= 1) return {features};
  return {x.rows(), features};
}

}  // namespace

// ---------------------------------------------------------------- Dense

Dense::Dense(std::string name, std::size_t in, std::size_t out, Activation act)
    : weight(name + ".weight", {out, in}), bias(name + ".bias", {out}), in_(in), out_(out), act_(act) {}

void Dense::init_glorot(Rng& rng) {
  glorot_fill(weight.mutate(), in_, out_, rng);
  bias.mutate().fill(0.0);
}

Tensor Dense::forward(const Tensor& x, DenseTrace* trace) const {
  if (x.cols() != in_) {
    throw ConfigError(weight.name + ": expected input width " + std::to_string(in_) + ", got " + shape_string(x.shape()));
  }
  Tensor pre(batch_shape(x, out_));
  auto pm = pre.matrix();
  pm.noalias() = x.matrix() * weight.value.matrix().transpose();
  pm.rowwise() += bias.value.matrix().row(0);
  Tensor out = activate(act_, pre);
  out.require_finite(weight.name);
  if (trace != nullptr) {
    trace->input = x;
    trace->output = out;
    trace->stamps = {stamp(weight), stamp(bias)};
  }
  return out;
}

Tensor Dense::backward(const DenseTrace& trace, const Tensor& dy) {
  require_fresh(trace.stamps);
  if (dy.shape() != trace.output.shape()) {
    throw ConfigError(weight.name + ": gradient shape " + shape_string(dy.shape()) + " does not match output " +
                      shape_string(trace.output.shape()));
  }
  const Tensor da = activation_backward(act_, trace.output, dy);
  const auto dam = da.matrix();
  weight.grad.matrix().noalias() += dam.transpose() * trace.input.matrix();
  bias.grad.matrix().row(0) += dam.colwise().sum();
  Tensor dx(trace.input.shape());
  dx.matrix().noalias() = dam * weight.value.matrix();
  return dx;
}

// ---------------------------------------------------------------- Mlp

Mlp::Mlp(const std::string& name, std::size_t in, const std::vector<LayerSpec>& specs) {
  std::size_t width = in;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    layers.emplace_back(name + "." + std::to_string(i), width, specs[i].out, specs[i].act);
    width = specs[i].out;
  }
}

std::size_t Mlp::in_features() const { return layers.empty() ? 0 : layers.front().in_features(); }
std::size_t Mlp::out_features() const { return layers.empty() ? 0 : layers.back().out_features(); }

void Mlp::init_glorot(Rng& rng) {
  for (auto& l : layers) l.init_glorot(rng);
}

Tensor Mlp::forward(const Tensor& x, MlpTrace* trace) const {
  if (trace != nullptr) trace->layers.resize(layers.size());
  Tensor h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    h = layers[i].forward(h, trace != nullptr ? &trace->layers[i] : nullptr);
  }
  return h;
}

Tensor Mlp::backward(const MlpTrace& trace, const Tensor& dy) {
  if (trace.layers.size() != layers.size()) throw ConfigError("Mlp::backward: trace does not match network depth");
  Tensor g = dy;
  for (std::size_t i = layers.size(); i-- > 0;) g = layers[i].backward(trace.layers[i], g);
  return g;
}

std::vector<Param*> Mlp::params() {
  std::vector<Param*> out;
  for (auto& l : layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<const Param*> Mlp::params() const {
  std::vector<const Param*> out;
  for (const auto& l : layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(std::string name, std::size_t in_channels, std::size_t out_channels, std::size_t in_size,
               std::size_t kernel, std::size_t stride, std::size_t padding, Activation act)
    : weight(name + ".weight", {out_channels, in_channels * kernel * kernel}),
      bias(name + ".bias", {out_channels}),
      in_ch_(in_channels),
      out_ch_(out_channels),
      in_size_(in_size),
      kernel_(kernel),
      stride_(stride),
      padding_(padding),
      act_(act) {
  if (stride == 0 || in_size + 2 * padding < kernel) throw ConfigError(name + ": invalid convolution geometry");
  out_size_ = (in_size + 2 * padding - kernel) / stride + 1;
}

void Conv2d::init_glorot(Rng& rng) {
  glorot_fill(weight.mutate(), in_ch_ * kernel_ * kernel_, out_ch_ * kernel_ * kernel_, rng);
  bias.mutate().fill(0.0);
}

Tensor Conv2d::im2col(const Tensor& x, std::size_t batch) const {
  const std::size_t patch = in_ch_ * kernel_ * kernel_;
  const std::size_t positions = out_size_ * out_size_;
  Tensor cols({batch * positions, patch});
  const auto n = static_cast<long>(in_size_);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* img = x.data().data() + b * in_features();
    for (std::size_t oy = 0; oy < out_size_; ++oy) {
      for (std::size_t ox = 0; ox < out_size_; ++ox) {
        double* dst = cols.data().data() + ((b * positions) + oy * out_size_ + ox) * patch;
        for (std::size_t c = 0; c < in_ch_; ++c) {
          for (std::size_t ky = 0; ky < kernel_; ++ky) {
            const long iy = static_cast<long>(oy * stride_ + ky) - static_cast<long>(padding_);
            for (std::size_t kx = 0; kx < kernel_; ++kx) {
              const long ix = static_cast<long>(ox * stride_ + kx) - static_cast<long>(padding_);
              const bool inside = iy >= 0 && iy < n && ix >= 0 && ix < n;
              *dst++ = inside ? img[c * in_size_ * in_size_ + static_cast<std::size_t>(iy * n + ix)] : 0.0;
            }
          }
        }
      }
    }
  }
  return cols;
}

Tensor Conv2d::forward(const Tensor& x, Conv2dTrace* trace) const {
  if (x.cols() != in_features()) {
    throw ConfigError(weight.name + ": expected input width " + std::to_string(in_features()) + ", got " +
                      shape_string(x.shape()));
  }
  const std::size_t batch = x.rows();
  const std::size_t positions = out_size_ * out_size_;
  Tensor cols = im2col(x, batch);
  RowMatrix pre = cols.matrix() * weight.value.matrix().transpose();
  pre.rowwise() += bias.value.matrix().row(0);
  Tensor out(batch_shape(x, out_features()));
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t p = 0; p < positions; ++p) {
      for (std::size_t c = 0; c < out_ch_; ++c) {
        out[b * out_features() + c * positions + p] =
            pre(static_cast<Eigen::Index>(b * positions + p), static_cast<Eigen::Index>(c));
      }
    }
  }
  out = activate(act_, out);
  out.require_finite(weight.name);
  if (trace != nullptr) {
    trace->columns = std::move(cols);
    trace->output = out;
    trace->batch = batch;
    trace->stamps = {stamp(weight), stamp(bias)};
  }
  return out;
}

Tensor Conv2d::backward(const Conv2dTrace& trace, const Tensor& dy) {
  require_fresh(trace.stamps);
  if (dy.shape() != trace.output.shape()) throw ConfigError(weight.name + ": gradient shape mismatch");
  const Tensor da = activation_backward(act_, trace.output, dy);
  const std::size_t batch = trace.batch;
  const std::size_t positions = out_size_ * out_size_;
  RowMatrix dpre(static_cast<Eigen::Index>(batch * positions), static_cast<Eigen::Index>(out_ch_));
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t p = 0; p < positions; ++p) {
      for (std::size_t c = 0; c < out_ch_; ++c) {
        dpre(static_cast<Eigen::Index>(b * positions + p), static_cast<Eigen::Index>(c)) =
            da[b * out_features() + c * positions + p];
      }
    }
  }
  weight.grad.matrix().noalias() += dpre.transpose() * trace.columns.matrix();
  bias.grad.matrix().row(0) += dpre.colwise().sum();
  const RowMatrix dcols = dpre * weight.value.matrix();

  Tensor dx(batch > 1 || trace.output.rank() > 1 ? Shape{batch, in_features()} : Shape{in_features()});
  const auto n = static_cast<long>(in_size_);
  const std::size_t patch = in_ch_ * kernel_ * kernel_;
  for (std::size_t b = 0; b < batch; ++b) {
    double* img = dx.data().data() + b * in_features();
    for (std::size_t oy = 0; oy < out_size_; ++oy) {
      for (std::size_t ox = 0; ox < out_size_; ++ox) {
        const double* src = dcols.data() + ((b * positions) + oy * out_size_ + ox) * patch;
        for (std::size_t c = 0; c < in_ch_; ++c) {
          for (std::size_t ky = 0; ky < kernel_; ++ky) {
            const long iy = static_cast<long>(oy * stride_ + ky) - static_cast<long>(padding_);
            for (std::size_t kx = 0; kx < kernel_; ++kx, ++src) {
              const long ix = static_cast<long>(ox * stride_ + kx) - static_cast<long>(padding_);
              if (iy >= 0 && iy < n && ix >= 0 && ix < n) {
                img[c * in_size_ * in_size_ + static_cast<std::size_t>(iy * n + ix)] += *src;
              }
            }
          }
        }
      }
    }
  }
  return dx;
}

// ---------------------------------------------------------------- Lstm

Lstm::Lstm(const std::string& name, std::size_t in, std::size_t hidden)
    : w_input(name + ".w_input", {4 * hidden, in}),
      w_recurrent(name + ".w_recurrent", {4 * hidden, hidden}),
      bias(name + ".bias", {4 * hidden}),
      in_(in),
      hidden_(hidden) {}

Tensor orthogonal(std::size_t rows, std::size_t cols, Rng& rng) {
  const std::size_t big = std::max(rows, cols);
  const std::size_t small = std::min(rows, cols);
  Eigen::MatrixXd g(static_cast<Eigen::Index>(big), static_cast<Eigen::Index>(small));
  for (Eigen::Index c = 0; c < g.cols(); ++c) {
    for (Eigen::Index r = 0; r < g.rows(); ++r) g(r, c) = gaussian(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(g.rows(), g.cols());
  // Sign fix makes the draw uniform over the orthogonal group.
  const Eigen::MatrixXd r = qr.matrixQR().topRows(g.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < q.cols(); ++c) {
    if (r(c, c) < 0) q.col(c) *= -1.0;
  }
  Tensor out({rows, cols});
  auto m = out.matrix();
  if (rows >= cols) {
    m = q;
  } else {
    m = q.transpose();
  }
  return out;
}

void Lstm::init(Rng& rng) {
  glorot_fill(w_input.mutate(), in_, 4 * hidden_, rng);
  w_recurrent.mutate() = orthogonal(4 * hidden_, hidden_, rng);
  bias.mutate().fill(0.0);
}

LstmState Lstm::zero_state(std::size_t batch) const {
  return {Tensor({batch, hidden_}), Tensor({batch, hidden_})};
}

LstmState Lstm::step(const Tensor& x, const LstmState& state, LstmStepTrace* trace) const {
  if (x.cols() != in_) {
    throw ConfigError(w_input.name + ": expected input width " + std::to_string(in_) + ", got " +
                      shape_string(x.shape()));
  }
  const std::size_t batch = x.rows();
  if (state.h.cols() != hidden_ || state.h.rows() != batch || state.c.size() != state.h.size()) {
    throw ConfigError(w_input.name + ": state shape mismatch");
  }
  const auto H = static_cast<Eigen::Index>(hidden_);
  RowMatrix pre = x.matrix() * w_input.value.matrix().transpose();
  pre.noalias() += state.h.matrix() * w_recurrent.value.matrix().transpose();
  pre.rowwise() += bias.value.matrix().row(0);

  Tensor gates({batch, 4 * hidden_});
  auto gm = gates.matrix();
  gm.leftCols(H) = (1.0 / (1.0 + (-pre.leftCols(H).array()).exp())).matrix();
  gm.middleCols(H, H) = (1.0 / (1.0 + (-pre.middleCols(H, H).array()).exp())).matrix();
  gm.middleCols(2 * H, H) = pre.middleCols(2 * H, H).array().tanh().matrix();
  gm.rightCols(H) = (1.0 / (1.0 + (-pre.rightCols(H).array()).exp())).matrix();

  LstmState next{Tensor({batch, hidden_}), Tensor({batch, hidden_})};
  Tensor tanh_c({batch, hidden_});
  next.c.matrix() = (gm.middleCols(H, H).array() * state.c.matrix().array() +
                     gm.leftCols(H).array() * gm.middleCols(2 * H, H).array())
                        .matrix();
  tanh_c.matrix() = next.c.matrix().array().tanh().matrix();
  next.h.matrix() = (gm.rightCols(H).array() * tanh_c.matrix().array()).matrix();
  next.h.require_finite(w_input.name);
  next.c.require_finite(w_input.name);
  if (trace != nullptr) {
    trace->x = x.rank() >= 2 ? x : x.reshaped({1, in_});
    trace->h_prev = state.h;
    trace->c_prev = state.c;
    trace->gates = std::move(gates);
    trace->c = next.c;
    trace->tanh_c = std::move(tanh_c);
    trace->stamps = {stamp(w_input), stamp(w_recurrent), stamp(bias)};
  }
  return next;
}

LstmStepGrad Lstm::backward_step(const LstmStepTrace& trace, const Tensor& dh, const Tensor& dc) {
  require_fresh(trace.stamps);
  const auto H = static_cast<Eigen::Index>(hidden_);
  const std::size_t batch = trace.x.rows();
  const auto gm = trace.gates.matrix();
  const auto i = gm.leftCols(H).array();
  const auto f = gm.middleCols(H, H).array();
  const auto g = gm.middleCols(2 * H, H).array();
  const auto o = gm.rightCols(H).array();
  const auto tc = trace.tanh_c.matrix().array();
  const auto dha = dh.matrix().array();

  const Eigen::ArrayXXd dc_total = dc.matrix().array() + dha * o * (1.0 - tc * tc);
  RowMatrix dpre(static_cast<Eigen::Index>(batch), 4 * H);
  dpre.leftCols(H) = (dc_total * g * i * (1.0 - i)).matrix();
  dpre.middleCols(H, H) = (dc_total * trace.c_prev.matrix().array() * f * (1.0 - f)).matrix();
  dpre.middleCols(2 * H, H) = (dc_total * i * (1.0 - g * g)).matrix();
  dpre.rightCols(H) = (dha * tc * o * (1.0 - o)).matrix();

  w_input.grad.matrix().noalias() += dpre.transpose() * trace.x.matrix();
  w_recurrent.grad.matrix().noalias() += dpre.transpose() * trace.h_prev.matrix();
  bias.grad.matrix().row(0) += dpre.colwise().sum();

  LstmStepGrad out{Tensor(trace.x.shape()), Tensor({batch, hidden_}), Tensor({batch, hidden_})};
  out.dx.matrix().noalias() = dpre * w_input.value.matrix();
  out.dh_prev.matrix().noalias() = dpre * w_recurrent.value.matrix();
  out.dc_prev.matrix() = (dc_total * f).matrix();
  return out;
}

void zero_grads(std::span<Param* const> params) {
  for (auto* p : params) p->zero_grad();
}

}  // namespace ptdrl::nn
