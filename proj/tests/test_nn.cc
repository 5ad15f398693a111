#include <cmath>

#include <gtest/gtest.h>

#include "vfo/nn.h"

namespace vfo {
namespace {

using nn::Activation;
using nn::DenseNet;

TEST(DenseNet, ZeroInitOutputsZero) {
  DenseNet net({3, 4, 2});
  Vec x(3);
  x << 1.0, -2.0, 0.5;
  EXPECT_EQ(net.forward(x), Vec::Zero(2));
}

TEST(DenseNet, IdentityLayer) {
  DenseNet net({3, 3}, Activation::kTanh, Activation::kIdentity);
  nn::ParamSet p = net.zeros_like();
  p.layers[0].weight = Mat::Identity(3, 3);
  net.set_params(p);
  Vec x(3);
  x << 0.3, -7.0, 2.0;
  EXPECT_EQ(net.forward(x), x);
}

TEST(DenseNet, ForwardMatchesScalarRecomputation) {
  Rng rng(7);
  const DenseNet net = DenseNet::glorot({2, 3, 1}, rng);
  Vec x(2);
  x << 0.4, -1.3;
  const auto& l0 = net.params().layers[0];
  const auto& l1 = net.params().layers[1];
  double out = l1.bias(0);
  for (int j = 0; j < 3; ++j) {
    double h = l0.bias(j);
    for (int i = 0; i < 2; ++i) h += x(i) * l0.weight(i, j);
    out += std::tanh(h) * l1.weight(j, 0);
  }
  EXPECT_NEAR(net.forward(x)(0), out, 1e-15);
  Mat batch(2, 2);
  batch.row(0) = x.transpose();
  batch.row(1) = x.transpose();
  const Mat y = net.forward(batch);
  EXPECT_NEAR(y(0, 0), out, 1e-15);
  EXPECT_NEAR(y(1, 0), out, 1e-15);
}

TEST(DenseNet, RejectsWrongInputWidth) {
  DenseNet net({3, 2});
  EXPECT_THROW(net.forward(Vec(Vec::Zero(4))), ShapeError);
}

TEST(DenseNet, GlorotIsSeedDeterministic) {
  Rng a(3), b(3);
  EXPECT_EQ(DenseNet::glorot({4, 8, 2}, a).flat_parameters(),
            DenseNet::glorot({4, 8, 2}, b).flat_parameters());
}

TEST(Backward, ZeroUpstreamGivesZeroGradients) {
  Rng rng(1);
  const DenseNet net = DenseNet::glorot({3, 5, 2}, rng);
  nn::Tape tape;
  const Mat x = Mat::Random(4, 3);
  net.forward(x, tape);
  const nn::ParamSet g = net.backward(tape, Mat::Zero(4, 2));
  EXPECT_EQ(g.flatten(), Vec::Zero(static_cast<Eigen::Index>(net.num_parameters())));
}

TEST(Backward, LinearNeuronClosedForm) {
  DenseNet net({2, 1});
  nn::ParamSet p = net.zeros_like();
  p.layers[0].weight << 0.5, -1.0;
  p.layers[0].bias << 0.25;
  net.set_params(p);
  Mat x(1, 2);
  x << 2.0, 3.0;
  const double target = 1.0;
  nn::Tape tape;
  const double pred = net.forward(x, tape)(0, 0);
  Mat up(1, 1);
  up << 2.0 * (pred - target);
  const nn::ParamSet g = net.backward(tape, up);
  EXPECT_DOUBLE_EQ(g.layers[0].weight(0, 0), 2.0 * (pred - target) * 2.0);
  EXPECT_DOUBLE_EQ(g.layers[0].weight(1, 0), 2.0 * (pred - target) * 3.0);
  EXPECT_DOUBLE_EQ(g.layers[0].bias(0), 2.0 * (pred - target));
}

TEST(Backward, MatchesFiniteDifferences) {
  Rng rng(11);
  DenseNet net = DenseNet::glorot({3, 4, 4, 2}, rng);
  const Mat x = Mat::Random(5, 3);
  Mat target = Mat::Random(5, 2);
  auto loss = [&](const DenseNet& n) {
    return (n.forward(x) - target).squaredNorm() / 5.0;
  };
  nn::Tape tape;
  const Mat y = net.forward(x, tape);
  Mat input_grad;
  const nn::ParamSet g = net.backward(tape, 2.0 * (y - target) / 5.0, &input_grad);
  EXPECT_LT(nn::relative_error(g.flatten(), nn::numerical_gradient(net, loss)), 1e-5);
  EXPECT_EQ(input_grad.rows(), 5);
  EXPECT_EQ(input_grad.cols(), 3);
}

TEST(Backward, InputGradientMatchesFiniteDifferences) {
  Rng rng(12);
  const DenseNet net = DenseNet::glorot({2, 3, 1}, rng);
  Mat x(1, 2);
  x << 0.3, -0.8;
  nn::Tape tape;
  net.forward(x, tape);
  Mat input_grad;
  net.backward(tape, Mat::Ones(1, 1), &input_grad);
  const double h = 1e-6;
  for (int i = 0; i < 2; ++i) {
    Mat xp = x, xm = x;
    xp(0, i) += h;
    xm(0, i) -= h;
    const double fd = (net.forward(xp)(0, 0) - net.forward(xm)(0, 0)) / (2 * h);
    EXPECT_NEAR(input_grad(0, i), fd, 1e-8);
  }
}

TEST(Adam, ZeroGradientKeepsParameters) {
  Rng rng(2);
  DenseNet net = DenseNet::glorot({2, 3, 1}, rng);
  const Vec before = net.flat_parameters();
  auto state = nn::AdamState::for_net(net, {});
  nn::adam_update(net, net.zeros_like(), state);
  EXPECT_EQ(net.flat_parameters(), before);
  EXPECT_EQ(state.step, 1);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  DenseNet net({1, 1});
  nn::ParamSet p = net.zeros_like();
  p.layers[0].weight << 1.0;
  net.set_params(p);
  nn::AdamConfig cfg;
  cfg.learning_rate = 1e-2;
  auto state = nn::AdamState::for_net(net, cfg);
  nn::ParamSet g = net.zeros_like();
  g.layers[0].weight << 3.7;
  nn::adam_update(net, g, state);
  EXPECT_NEAR(net.params().layers[0].weight(0, 0), 1.0 - 1e-2, 1e-8);
  g.layers[0].weight << -0.2;
  DenseNet other({1, 1});
  other.set_params(p);
  auto state2 = nn::AdamState::for_net(other, cfg);
  nn::adam_update(other, g, state2);
  EXPECT_NEAR(other.params().layers[0].weight(0, 0), 1.0 + 1e-2, 1e-8);
}

TEST(Adam, QuadraticLossDecreasesEveryStep) {
  DenseNet net({1, 1});
  nn::ParamSet p = net.zeros_like();
  p.layers[0].bias << 2.0;
  net.set_params(p);
  nn::AdamConfig cfg;
  cfg.learning_rate = 0.1;
  auto state = nn::AdamState::for_net(net, cfg);
  double prev = std::pow(net.params().layers[0].bias(0) - 0.5, 2);
  for (int i = 0; i < 10; ++i) {
    nn::ParamSet g = net.zeros_like();
    g.layers[0].bias << 2.0 * (net.params().layers[0].bias(0) - 0.5);
    nn::adam_update(net, g, state);
    const double loss = std::pow(net.params().layers[0].bias(0) - 0.5, 2);
    EXPECT_LT(loss, prev);
    prev = loss;
  }
}

TEST(Adam, NonFiniteGradientThrowsAndLeavesState) {
  Rng rng(4);
  DenseNet net = DenseNet::glorot({2, 2}, rng);
  const Vec before = net.flat_parameters();
  auto state = nn::AdamState::for_net(net, {});
  nn::ParamSet g = net.zeros_like();
  g.layers[0].weight(0, 0) = std::nan("");
  EXPECT_THROW(nn::adam_update(net, g, state), NumericError);
  EXPECT_EQ(net.flat_parameters(), before);
  EXPECT_EQ(state.step, 0);
}

TEST(Adam, DecoupledWeightDecay) {
  DenseNet net({1, 1});
  nn::ParamSet p = net.zeros_like();
  p.layers[0].weight << 2.0;
  net.set_params(p);
  nn::AdamConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.weight_decay = 0.5;
  auto state = nn::AdamState::for_net(net, cfg);
  nn::adam_update(net, net.zeros_like(), state);
  EXPECT_NEAR(net.params().layers[0].weight(0, 0), 2.0 - 0.1 * 0.5 * 2.0, 1e-12);
}

TEST(Snapshot, FrozenAgainstLaterUpdates) {
  Rng rng(5);
  DenseNet net = DenseNet::glorot({2, 4, 1}, rng);
  Vec x(2);
  x << 0.1, 0.2;
  const nn::ParameterSnapshot snap = nn::snapshot(net, 0);
  EXPECT_EQ(snap.forward(x), net.forward(x));
  const Vec before = snap.forward(x);
  auto state = nn::AdamState::for_net(net, {});
  nn::ParamSet g = net.zeros_like();
  g.layers[1].bias << 1.0;
  nn::adam_update(net, g, state);
  EXPECT_EQ(snap.forward(x), before);
  EXPECT_NE(net.forward(x), before);
}

TEST(Snapshot, StepMustBeMultipleOfPeriod) {
  DenseNet net({1, 1});
  EXPECT_NO_THROW(nn::snapshot(net, 400));
  EXPECT_THROW(nn::snapshot(net, 401), std::invalid_argument);
}

TEST(ParamSet, SetParamsRejectsBadShapesAndValues) {
  DenseNet net({2, 2});
  nn::ParamSet bad = DenseNet({3, 2}).zeros_like();
  EXPECT_THROW(net.set_params(bad), ShapeError);
  nn::ParamSet inf = net.zeros_like();
  inf.layers[0].bias(1) = INFINITY;
  EXPECT_THROW(net.set_params(inf), NumericError);
}

TEST(RelativeError, Edges) {
  EXPECT_EQ(nn::relative_error(Vec::Zero(3), Vec::Zero(3)), 0.0);
  Vec a(2), b(2);
  a << 1.0, 0.0;
  b << 0.0, 1.0;
  EXPECT_NEAR(nn::relative_error(a, b), std::sqrt(2.0), 1e-15);
}

}  // namespace
}  // namespace vfo
