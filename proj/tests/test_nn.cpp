#include <gtest/gtest.h>

#include <cmath>

#include "renyi/error.hpp"
#include "renyi/nn.hpp"
#include "support/oracles.hpp"

using namespace renyi;
using nn::Activation;
using nn::Direction;
using nn::Mlp;
using oracle::random_tensor;

TEST(Architecture, ParsesTableNotation) {
  const nn::Architecture a = nn::parse_architecture("FC:64 R, FC:64 T,FC:16 Sig, FC:10 SM, FC:1");
  ASSERT_EQ(a.size(), 5u);
  EXPECT_EQ(a[0], (nn::LayerSpec{64, Activation::relu}));
  EXPECT_EQ(a[1], (nn::LayerSpec{64, Activation::tanh}));
  EXPECT_EQ(a[2], (nn::LayerSpec{16, Activation::sigmoid}));
  EXPECT_EQ(a[3], (nn::LayerSpec{10, Activation::softmax_rows}));
  EXPECT_EQ(a[4], (nn::LayerSpec{1, Activation::identity}));
  EXPECT_EQ(nn::parse_architecture("FC:3 None"), (nn::Architecture{{3, Activation::identity}}));
}

TEST(Architecture, FormatRoundTrips) {
  const nn::Architecture a = nn::parse_architecture("FC:16 R, FC:8 R, FC:4 R, FC:1 Sig");
  EXPECT_EQ(nn::format_architecture(a), "FC:16 R, FC:8 R, FC:4 R, FC:1 Sig");
  EXPECT_EQ(nn::parse_architecture(nn::format_architecture(a)), a);
}

TEST(Architecture, RejectsMalformedText) {
  for (const char* bad : {"", "FC:0 R", "FC:4 X", "Conv:3 R", "FC:R", "FC:4 R,"}) {
    EXPECT_THROW(nn::parse_architecture(bad), Error) << '"' << bad << '"';
  }
}

TEST(MlpInit, SingleIdentityUnit) {
  const Mlp m = Mlp::init({{1, Activation::identity}}, 1, 1234);
  ASSERT_EQ(m.layers().size(), 1u);
  EXPECT_EQ(m.layers()[0].weight.rows(), 1);
  EXPECT_EQ(m.layers()[0].weight.cols(), 1);
  EXPECT_EQ(m.layers()[0].bias(0, 0), 0.0);
}

TEST(MlpInit, SameSeedIsBitIdentical) {
  const auto arch = nn::parse_architecture("FC:64 R, FC:64 R, FC:1");
  const Mlp a = Mlp::init(arch, 2, 7), b = Mlp::init(arch, 2, 7), c = Mlp::init(arch, 2, 8);
  for (std::size_t l = 0; l < a.layers().size(); ++l) {
    EXPECT_EQ(a.layers()[l].weight, b.layers()[l].weight);
    EXPECT_EQ(a.layers()[l].bias, b.layers()[l].bias);
  }
  EXPECT_NE(a.layers()[0].weight, c.layers()[0].weight);
}

TEST(MlpInit, ParameterCountByHand) {
  const Mlp m = Mlp::init(nn::parse_architecture("FC:64 R, FC:64 R, FC:1"), 2, 0);
  EXPECT_EQ(m.parameter_count(), 2u * 64 + 64 + 64 * 64 + 64 + 64 + 1);
  EXPECT_EQ(m.parameter_count(), 4417u);
}

TEST(MlpInit, GlorotBoundsAndZeroBias) {
  const Mlp m = Mlp::init(nn::parse_architecture("FC:30 R, FC:5"), 20, 3);
  const double bound0 = std::sqrt(6.0 / (20 + 30));
  EXPECT_LE(m.layers()[0].weight.cwiseAbs().maxCoeff(), bound0);
  EXPECT_GT(m.layers()[0].weight.cwiseAbs().maxCoeff(), 0.8 * bound0);
  EXPECT_EQ(m.layers()[1].bias, nn::Tensor::Zero(1, 5));
}

TEST(MlpInit, EmptySpecFails) { EXPECT_THROW(Mlp::init({}, 3, 0), Error); }

TEST(MlpForward, ZeroWeightsWithSigmoidHeadGiveOneHalf) {
  Mlp m = Mlp::init(nn::parse_architecture("FC:4 R, FC:1 Sig"), 3, 1);
  for (auto& layer : m.layers()) layer.weight.setZero();
  const nn::Tensor out = m.predict(random_tensor(5, 3, 2));
  for (Eigen::Index i = 0; i < out.rows(); ++i) EXPECT_EQ(out(i, 0), 0.5);
}

TEST(MlpForward, SingleIdentityLayerIsAffineMap) {
  Mlp m = Mlp::init(nn::parse_architecture("FC:2"), 3, 1);
  m.layers()[0].bias = random_tensor(1, 2, 3);
  const nn::Tensor x = random_tensor(4, 3, 4);
  nn::Tape tape;
  const nn::NodeId y = m.forward(tape, tape.input(x));
  const nn::Tensor expect = (x * m.layers()[0].weight).rowwise() + m.layers()[0].bias.row(0);
  EXPECT_LT((tape.value(y) - expect).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MlpForward, MatchesHandRolledComputation) {
  const Mlp m = Mlp::init(nn::parse_architecture("FC:5 T, FC:4 R, FC:1 Sig"), 2, 11);
  const nn::Tensor x = random_tensor(3, 2, 12);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    std::vector<double> h = {x(r, 0), x(r, 1)};
    for (const auto& layer : m.layers()) {
      std::vector<double> next(static_cast<std::size_t>(layer.weight.cols()));
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
        double z = layer.bias(0, j);
        for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) z += h[static_cast<std::size_t>(i)] * layer.weight(i, j);
        switch (layer.act) {
          case Activation::tanh: z = std::tanh(z); break;
          case Activation::relu: z = z > 0 ? z : 0.0; break;
          case Activation::sigmoid: z = 1.0 / (1.0 + std::exp(-z)); break;
          default: break;
        }
        next[static_cast<std::size_t>(j)] = z;
      }
      h = next;
    }
    EXPECT_NEAR(m.predict(x.row(r))(0, 0), h[0], 1e-12);
    nn::Tape tape;
    EXPECT_NEAR(tape.value(m.forward(tape, tape.input(x)))(r, 0), h[0], 1e-12);
  }
}

TEST(MlpForward, InputWidthMismatchIsShapeError) {
  const Mlp m = Mlp::init(nn::parse_architecture("FC:2"), 3, 1);
  nn::Tape tape;
  try {
    m.forward(tape, tape.input(random_tensor(4, 2, 1)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::shape);
  }
}

namespace {

// Gradients of sum(w * c) for a single-weight identity network.
ad::Gradients linear_grads(const Mlp& m, double c) {
  nn::Tape tape;
  const nn::NodeId y = m.forward(tape, tape.input(nn::Tensor::Constant(1, 1, c)));
  return tape.backward(tape.sum(y));
}

}  // namespace

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  Mlp m = Mlp::init(nn::parse_architecture("FC:3 R, FC:1"), 2, 4);
  const Mlp before = m;
  nn::AdamState opt(m, {});
  nn::Tape tape;
  const nn::NodeId y = m.forward(tape, tape.input(random_tensor(4, 2, 1)));
  const ad::Gradients g = tape.backward(tape.scale(tape.sum(y), 0.0));
  opt.step(m, g, Direction::descent);
  for (std::size_t l = 0; l < m.layers().size(); ++l) EXPECT_EQ(m.layers()[l].weight, before.layers()[l].weight);
  EXPECT_EQ(opt.step_count(), 1u);
}

TEST(Adam, DescentThenAscentDoesNotReturnToStart) {
  Mlp m = Mlp::init(nn::parse_architecture("FC:1"), 1, 4);
  const double start = m.layers()[0].weight(0, 0);
  nn::AdamState opt(m, {.learning_rate = 0.1});
  const ad::Gradients g = linear_grads(m, 2.0);
  opt.step(m, g, Direction::descent);
  opt.step(m, g, Direction::ascent);
  EXPECT_NE(m.layers()[0].weight(0, 0), start);
  EXPECT_EQ(opt.step_count(), 2u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Mlp m = Mlp::init(nn::parse_architecture("FC:1"), 1, 4);
  const double start = m.layers()[0].weight(0, 0);
  nn::AdamState opt(m, {.learning_rate = 0.01});
  opt.step(m, linear_grads(m, 3.0), Direction::ascent);
  EXPECT_NEAR(m.layers()[0].weight(0, 0) - start, 0.01, 1e-9);
}

TEST(Adam, ScalarQuadraticConverges) {
  Mlp m = Mlp::init(nn::parse_architecture("FC:1"), 1, 4);
  nn::AdamState opt(m, {.learning_rate = 0.1});
  double previous = 1e300;
  for (int step = 0; step < 500; ++step) {
    nn::Tape tape;
    const nn::NodeId w = tape.parameter(m.layers()[0].weight);
    tape.parameter(m.layers()[0].bias);
    const nn::NodeId loss = tape.sum(tape.square(tape.sub(w, tape.input(nn::Tensor::Constant(1, 1, 3.0)))));
    const double value = tape.scalar(loss);
    if (step > 10 && step < 40) EXPECT_LT(value, previous) << "step " << step;
    previous = value;
    nn::adam_step(opt, m, tape.backward(loss), Direction::descent);
  }
  EXPECT_LT(std::abs(m.layers()[0].weight(0, 0) - 3.0), 1e-3);
}

TEST(Adam, MissingGradientNamesParameter) {
  Mlp m = Mlp::init(nn::parse_architecture("FC:2 R, FC:1"), 2, 4);
  Mlp other = Mlp::init(nn::parse_architecture("FC:2 R, FC:1"), 2, 5);
  nn::AdamState opt(m, {});
  nn::Tape tape;
  const nn::NodeId y = other.forward(tape, tape.input(random_tensor(3, 2, 1)));
  const ad::Gradients g = tape.backward(tape.sum(y));
  try {
    opt.step(m, g, Direction::descent);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("layer 0 weight"), std::string::npos) << e.what();
  }
}

TEST(Adam, TrainingIsBitDeterministic) {
  auto train = [] {
    Mlp m = Mlp::init(nn::parse_architecture("FC:8 R, FC:1"), 3, 21);
    nn::AdamState opt(m, {});
    const nn::Tensor x = random_tensor(16, 3, 1), y = random_tensor(16, 1, 2);
    for (int i = 0; i < 50; ++i) {
      nn::Tape tape;
      const nn::NodeId loss = tape.mse(m.forward(tape, tape.input(x)), tape.input(y));
      opt.step(m, tape.backward(loss), Direction::descent);
    }
    return m;
  };
  const Mlp a = train(), b = train();
  for (std::size_t l = 0; l < a.layers().size(); ++l) {
    EXPECT_EQ(a.layers()[l].weight, b.layers()[l].weight);
    EXPECT_TRUE(a.layers()[l].weight.allFinite());
  }
}
