#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ptdrl/nn/checkpoint.hpp"
#include "ptdrl/nn/layers.hpp"
#include "ptdrl/nn/optim.hpp"

using namespace ptdrl;
using namespace ptdrl::nn;

namespace {

Dense identity_layer(std::size_t n, Activation act) {
  Dense d("d", n, n, act);
  auto& w = d.weight.mutate();
  for (std::size_t i = 0; i < n; ++i) w.at(i, i) = 1.0;
  return d;
}

Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.storage()) v = scale * gaussian(rng);
  return t;
}

// Sum of (output * fixed random projection): a generic scalar loss.
double projected(const Tensor& y, const Tensor& proj) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * proj[i];
  return s;
}

}  // namespace

TEST(Dense, IdentityActivationPassesInputThrough) {
  const auto d = identity_layer(3, Activation::identity);
  const Tensor y = d.forward(Tensor::vector({1, 2, 3}));
  EXPECT_EQ(y, Tensor::vector({1, 2, 3}));
}

TEST(Dense, ReluClampsNegatives) {
  const auto d = identity_layer(3, Activation::relu);
  EXPECT_EQ(d.forward(Tensor::vector({-1, 0, 2})), Tensor::vector({0, 0, 2}));
}

TEST(Dense, HandMatrixMultiply) {
  Dense d("d", 2, 2, Activation::identity);
  d.weight.mutate() = Tensor({2, 2}, {1, 1, 1, -1});
  EXPECT_EQ(d.forward(Tensor::vector({3, 1})), Tensor::vector({4, 2}));
}

TEST(Dense, ShapeMismatchIsConfigError) {
  Dense d("d", 2, 2, Activation::identity);
  EXPECT_THROW(d.forward(Tensor::vector({1, 2, 3})), ConfigError);
}

TEST(Dense, NonFiniteOutputIsHardError) {
  Dense d("d", 1, 1, Activation::exp);
  d.weight.mutate()[0] = 1.0;
  EXPECT_THROW(d.forward(Tensor::vector({1e6})), NumericError);
}

TEST(Backward, LinearScalarGradientIsInput) {
  Dense d("d", 1, 1, Activation::identity);
  d.weight.mutate()[0] = 0.7;
  DenseTrace tr;
  d.forward(Tensor::vector({3.0}), &tr);
  d.backward(tr, Tensor::vector({1.0}));
  EXPECT_DOUBLE_EQ(d.weight.grad[0], 3.0);
}

TEST(Backward, DeadReluHasZeroGradient) {
  Dense d("d", 1, 1, Activation::relu);
  d.weight.mutate()[0] = -1.0;
  DenseTrace tr;
  d.forward(Tensor::vector({3.0}), &tr);
  d.backward(tr, Tensor::vector({1.0}));
  EXPECT_EQ(d.weight.grad[0], 0.0);
  EXPECT_EQ(d.bias.grad[0], 0.0);
}

TEST(Backward, StaleTraceIsRejected) {
  Dense d("d", 2, 1, Activation::identity);
  DenseTrace tr;
  d.forward(Tensor::vector({1, 2}), &tr);
  d.weight.mutate()[0] = 5.0;
  EXPECT_THROW(d.backward(tr, Tensor::vector({1.0})), StaleTraceError);
}

TEST(Backward, ThreeLayerNetMatchesHandWrittenCentralDifferences) {
  Rng rng(11);
  Mlp net("mlp", 5, {{7, Activation::tanh}, {6, Activation::sigmoid}, {3, Activation::identity}});
  net.init_glorot(rng);
  for (auto* p : net.params()) p->mutate() = random_tensor(p->value.shape(), rng, 0.5);
  const Tensor x = random_tensor({4, 5}, rng);
  const Tensor proj = random_tensor({4, 3}, rng);

  MlpTrace tr;
  net.forward(x, &tr);
  net.backward(tr, proj);

  // Independent finite-difference oracle, step 1e-5.
  double worst = 0.0;
  for (auto* p : net.params()) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double w0 = p->value[i];
      p->mutate()[i] = w0 + 1e-5;
      const double up = projected(net.forward(x), proj);
      p->mutate()[i] = w0 - 1e-5;
      const double down = projected(net.forward(x), proj);
      p->mutate()[i] = w0;
      const double fd = (up - down) / 2e-5;
      const double a = p->grad[i];
      worst = std::max(worst, std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6}));
    }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(GradCheck, LinearNetIsExact) {
  Rng rng(3);
  Mlp net("lin", 4, {{3, Activation::identity}, {2, Activation::identity}});
  net.init_glorot(rng);
  const Tensor x = random_tensor({3, 4}, rng);
  const Tensor proj = random_tensor({3, 2}, rng);
  auto params = net.params();
  const auto r = grad_check(params, [&](bool bw) {
    MlpTrace tr;
    const Tensor y = net.forward(x, &tr);
    if (bw) net.backward(tr, proj);
    return projected(y, proj);
  }, 1e-3);  // no truncation error for a linear map, so a wide step only reduces roundoff
  EXPECT_LT(r.max_relative_error, 1e-9) << r.worst_param;
}

TEST(GradCheck, TanhMlp8x8) {
  Rng rng(4);
  Mlp net("tanh", 8, {{8, Activation::tanh}, {8, Activation::tanh}});
  net.init_glorot(rng);
  const Tensor x = random_tensor({2, 8}, rng);
  const Tensor target = random_tensor({2, 8}, rng);
  auto params = net.params();
  const auto r = grad_check(params, [&](bool bw) {
    MlpTrace tr;
    const Tensor y = net.forward(x, &tr);
    Tensor dy(y.shape());
    double loss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double e = y[i] - target[i];
      loss += 0.5 * e * e;
      dy[i] = e;
    }
    if (bw) net.backward(tr, dy);
    return loss;
  });
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_param;
}

TEST(GradCheck, SoftmaxNllHead) {
  Rng rng(5);
  Mlp net("cls", 6, {{5, Activation::relu}, {4, Activation::softmax}});
  net.init_glorot(rng);
  const Tensor x = random_tensor({3, 6}, rng);
  const std::size_t labels[3] = {0, 3, 1};
  auto params = net.params();
  const auto r = grad_check(params, [&](bool bw) {
    MlpTrace tr;
    const Tensor p = net.forward(x, &tr);
    Tensor dp(p.shape());
    double loss = 0.0;
    for (std::size_t b = 0; b < 3; ++b) {
      loss -= std::log(p.at(b, labels[b]));
      dp.at(b, labels[b]) = -1.0 / p.at(b, labels[b]);
    }
    if (bw) net.backward(tr, dp);
    return loss;
  });
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_param;
}

TEST(GradCheck, ExpActivation) {
  Rng rng(6);
  Mlp net("e", 3, {{4, Activation::exp}});
  net.init_glorot(rng);
  const Tensor x = random_tensor({2, 3}, rng, 0.5);
  const Tensor proj = random_tensor({2, 4}, rng);
  auto params = net.params();
  const auto r = grad_check(params, [&](bool bw) {
    MlpTrace tr;
    const Tensor y = net.forward(x, &tr);
    if (bw) net.backward(tr, proj);
    return projected(y, proj);
  });
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_param;
}

TEST(GradCheck, StridedConvolution) {
  Rng rng(7);
  Conv2d conv("conv", 2, 3, 8, 4, 2, 1, Activation::tanh);
  conv.init_glorot(rng);
  EXPECT_EQ(conv.out_size(), 4u);
  const Tensor x = random_tensor({2, 2 * 8 * 8}, rng);
  const Tensor proj = random_tensor({2, 3 * 4 * 4}, rng);
  auto params = conv.params();
  const auto r = grad_check(params, [&](bool bw) {
    Conv2dTrace tr;
    const Tensor y = conv.forward(x, &tr);
    if (bw) conv.backward(tr, proj);
    return projected(y, proj);
  });
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_param;
}

TEST(GradCheck, ConvolutionInputGradient) {
  Rng rng(8);
  Conv2d conv("conv", 1, 2, 6, 4, 2, 1, Activation::identity);
  conv.init_glorot(rng);
  Tensor x = random_tensor({1, 36}, rng);
  const Tensor proj = random_tensor({1, conv.out_features()}, rng);
  Conv2dTrace tr;
  conv.forward(x, &tr);
  const Tensor dx = conv.backward(tr, proj);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + 1e-5;
    const double up = projected(conv.forward(x), proj);
    x[i] = x0 - 1e-5;
    const double down = projected(conv.forward(x), proj);
    x[i] = x0;
    EXPECT_NEAR(dx[i], (up - down) / 2e-5, 1e-8);
  }
}

TEST(GradCheck, LstmUnrolledSequence) {
  Rng rng(9);
  Lstm lstm("lstm", 3, 4);
  lstm.init(rng);
  for (auto& b : lstm.bias.mutate().storage()) b = 0.1 * gaussian(rng);
  std::vector<Tensor> xs;
  std::vector<Tensor> projs;
  for (int t = 0; t < 4; ++t) {
    xs.push_back(random_tensor({2, 3}, rng));
    projs.push_back(random_tensor({2, 4}, rng));
  }
  auto params = lstm.params();
  const auto r = grad_check(params, [&](bool bw) {
    std::vector<LstmStepTrace> traces(xs.size());
    LstmState s = lstm.zero_state(2);
    double loss = 0.0;
    for (std::size_t t = 0; t < xs.size(); ++t) {
      s = lstm.step(xs[t], s, &traces[t]);
      loss += projected(s.h, projs[t]);
    }
    if (bw) {
      Tensor dh({2, 4});
      Tensor dc({2, 4});
      for (std::size_t t = xs.size(); t-- > 0;) {
        for (std::size_t i = 0; i < dh.size(); ++i) dh[i] += projs[t][i];
        auto g = lstm.backward_step(traces[t], dh, dc);
        dh = std::move(g.dh_prev);
        dc = std::move(g.dc_prev);
      }
    }
    return loss;
  });
  EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_param;
}

TEST(Softmax, SumsToOneAndStrictlyPositive) {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor x = random_tensor({3, 7}, rng, trial % 2 ? 30.0 : 1.0);
    const Tensor p = activate(Activation::softmax, x);
    for (std::size_t r = 0; r < 3; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < 7; ++c) {
        EXPECT_GT(p.at(r, c), 0.0);
        s += p.at(r, c);
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(Adam, ZeroGradientLeavesParametersAndDecaysMoments) {
  Param p("p", {2});
  p.mutate() = Tensor::vector({1.0, -2.0});
  std::vector<Param*> ps{&p};
  auto st = make_adam_state(ps, {});
  std::vector<Tensor> g{Tensor::vector({1.0, 1.0})};
  adam_step(ps, g, st);
  const double m_after_one = st.first_moment[0][0];
  const Tensor before = p.value;
  std::vector<Tensor> zero{Tensor({2})};
  adam_step(ps, zero, st);
  EXPECT_NEAR(st.first_moment[0][0], 0.9 * m_after_one, 1e-15);
  // Zero gradient from a zero state does not move the parameters.
  Param q("q", {2});
  q.mutate() = Tensor::vector({1.0, -2.0});
  std::vector<Param*> qs{&q};
  auto sq = make_adam_state(qs, {});
  adam_step(qs, zero, sq);
  EXPECT_EQ(q.value, Tensor::vector({1.0, -2.0}));
  EXPECT_EQ(sq.step_count, 1u);
  (void)before;
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Param p("p", {1});
  p.mutate()[0] = 2.0;
  std::vector<Param*> ps{&p};
  auto st = make_adam_state(ps, {.lr = 0.1});
  std::vector<Tensor> g{Tensor::vector({1.0})};
  adam_step(ps, g, st);
  // mhat = 1, vhat = 1 after bias correction.
  EXPECT_NEAR(p.value[0], 2.0 - 0.1 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, NonFiniteGradientNamesParameter) {
  Param p("encoder.0.weight", {1});
  std::vector<Param*> ps{&p};
  auto st = make_adam_state(ps, {});
  std::vector<Tensor> g{Tensor::vector({std::nan("")})};
  try {
    adam_step(ps, g, st);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("encoder.0.weight"), std::string::npos);
  }
}

TEST(Adam, IdenticalStreamsGiveBitIdenticalParameters) {
  auto train = [](std::uint64_t seed) {
    Rng rng(seed);
    Mlp net("n", 4, {{6, Activation::relu}, {2, Activation::identity}});
    net.init_glorot(rng);
    auto params = net.params();
    auto st = make_adam_state(params, {.lr = 1e-2});
    Rng data(99);
    for (int step = 0; step < 50; ++step) {
      const Tensor x = random_tensor({8, 4}, data);
      MlpTrace tr;
      const Tensor y = net.forward(x, &tr);
      zero_grads(params);
      net.backward(tr, y);
      adam_step(params, st);
    }
    std::vector<Tensor> out;
    for (auto* p : params) out.push_back(p->value);
    return out;
  };
  EXPECT_EQ(train(1), train(1));
  EXPECT_NE(train(1), train(2));
}

TEST(Init, OrthogonalRecurrentWeights) {
  Rng rng(1);
  const Tensor q = orthogonal(16, 4, rng);
  const RowMatrix qtq = q.matrix().transpose() * q.matrix();
  EXPECT_TRUE(qtq.isApprox(RowMatrix::Identity(4, 4), 1e-12));
}

TEST(Init, GlorotBoundsAndZeroBias) {
  Rng rng(1);
  Dense d("d", 30, 20, Activation::relu);
  d.init_glorot(rng);
  const double limit = std::sqrt(6.0 / 50.0);
  for (double w : d.weight.value.storage()) EXPECT_LE(std::abs(w), limit);
  for (double b : d.bias.value.storage()) EXPECT_EQ(b, 0.0);
}

TEST(Checkpoint, RoundTripPreservesValues) {
  Rng rng(2);
  Mlp a("net", 3, {{4, Activation::relu}, {2, Activation::identity}});
  a.init_glorot(rng);
  std::stringstream ss;
  std::vector<NamedTensor> entries;
  for (const auto* p : std::as_const(a).params()) entries.push_back({p->name, p->value});
  write_checkpoint(ss, entries);
  const auto back = read_checkpoint(ss);
  Mlp b("net", 3, {{4, Activation::relu}, {2, Activation::identity}});
  auto bp = b.params();
  load_params(back, bp);
  for (std::size_t i = 0; i < bp.size(); ++i) EXPECT_EQ(bp[i]->value, a.params()[i]->value);
}

TEST(Checkpoint, StartsWithMagicAndVersion) {
  std::stringstream ss;
  std::vector<NamedTensor> entries{{"x", Tensor::vector({1.5})}};
  write_checkpoint(ss, entries);
  const std::string bytes = ss.str();
  EXPECT_EQ(bytes.substr(0, 4), "PTNN");
  EXPECT_EQ(bytes[4], 1);
  // magic + version + count + name len + "x" + rank + dim + one f64
  EXPECT_EQ(bytes.size(), 4u + 4 + 4 + 4 + 1 + 4 + 4 + 8);
}

TEST(Checkpoint, ShapeMismatchRejected) {
  Mlp a("net", 3, {{4, Activation::relu}});
  std::vector<NamedTensor> entries;
  for (const auto* p : std::as_const(a).params()) entries.push_back({p->name, p->value});
  Mlp b("net", 3, {{5, Activation::relu}});
  auto bp = b.params();
  EXPECT_THROW(load_params(entries, bp), ConfigError);
}

TEST(Checkpoint, BadMagicRejected) {
  std::stringstream ss("XXXX");
  EXPECT_THROW(read_checkpoint(ss), ConfigError);
}
