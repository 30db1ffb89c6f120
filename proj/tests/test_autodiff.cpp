#include <gtest/gtest.h>

#include <cmath>

#include "renyi/autodiff.hpp"
#include "renyi/error.hpp"
#include "renyi/nn.hpp"
#include "support/oracles.hpp"

using namespace renyi;
using ad::Activation;
using ad::NodeId;
using ad::Tape;
using ad::Tensor;
using oracle::check_gradients;
using oracle::random_tensor;

namespace {

constexpr double kTol = 1e-5;

// sum(node * weights): a scalar that exercises every output entry.
NodeId reduce(Tape& tape, NodeId node, std::uint64_t seed) {
  const Tensor& v = tape.value(node);
  return tape.sum(tape.mul(node, tape.input(random_tensor(v.rows(), v.cols(), seed))));
}

Tensor mat(std::initializer_list<std::initializer_list<double>> rows) {
  Tensor t(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) t(i, j++) = v;
    ++i;
  }
  return t;
}

}  // namespace

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  Tape tape;
  const Tensor m = random_tensor(2, 3, 4);
  const NodeId out = tape.matmul(tape.input(Tensor::Identity(2, 2)), tape.input(m));
  EXPECT_EQ(tape.value(out), m);
}

TEST(Matmul, RowTimesColumn) {
  Tape tape;
  const NodeId out = tape.matmul(tape.input(mat({{1, 2}})), tape.input(mat({{3}, {4}})));
  EXPECT_DOUBLE_EQ(tape.scalar(out), 11.0);
}

TEST(Matmul, ShapeErrorNamesBothShapes) {
  Tape tape;
  try {
    tape.matmul(tape.input(Tensor::Zero(2, 3)), tape.input(Tensor::Zero(2, 3)));
    FAIL() << "expected a shape error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::shape);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
  }
}

TEST(Matmul, GradientMatchesFiniteDifferences) {
  std::vector<Tensor> params = {random_tensor(3, 3, 1), random_tensor(3, 3, 2)};
  const auto r = check_gradients(params, [](Tape& t, const std::vector<NodeId>& p) {
    return t.sum(t.matmul(p[0], p[1]));
  });
  EXPECT_LT(r.max_rel_error, 1e-6);
}

TEST(Activation, ReluAndSigmoidValues) {
  Tape tape;
  const NodeId relu = tape.activation(tape.input(mat({{-1, 0, 2}})), Activation::relu);
  EXPECT_EQ(tape.value(relu), mat({{0, 0, 2}}));
  const NodeId sig = tape.activation(tape.input(mat({{0}})), Activation::sigmoid);
  EXPECT_DOUBLE_EQ(tape.scalar(sig), 0.5);
}

TEST(Activation, SoftmaxRowsSumToOne) {
  Tape tape;
  const NodeId sm = tape.activation(tape.input(random_tensor(4, 5, 9)), Activation::softmax_rows);
  const Tensor rows = tape.value(sm).rowwise().sum();
  for (Eigen::Index i = 0; i < rows.rows(); ++i) EXPECT_NEAR(rows(i, 0), 1.0, 1e-12);
}

TEST(Activation, RejectsNonFiniteInput) {
  Tape tape;
  Tensor bad = Tensor::Zero(1, 2);
  bad(0, 1) = std::nan("");
  EXPECT_THROW(tape.activation(tape.input(bad), Activation::tanh), Error);
}

class ActivationGradient : public ::testing::TestWithParam<Activation> {};

TEST_P(ActivationGradient, MatchesFiniteDifferences) {
  const Activation act = GetParam();
  std::vector<Tensor> params = {random_tensor(2, 5, 3)};
  const auto r = check_gradients(params, [&](Tape& t, const std::vector<NodeId>& p) {
    return reduce(t, t.activation(p[0], act), 17);
  });
  EXPECT_LT(r.max_rel_error, 1e-6) << ad::to_string(act);
}

INSTANTIATE_TEST_SUITE_P(AllKinds, ActivationGradient,
                         ::testing::Values(Activation::identity, Activation::relu, Activation::tanh,
                                           Activation::sigmoid, Activation::softmax_rows));

TEST(Standardize, TwoPointsMapToPlusMinusOne) {
  Tape tape;
  const NodeId out = tape.standardize(tape.input(mat({{1}, {3}})), 0.0);
  EXPECT_DOUBLE_EQ(tape.value(out)(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(tape.value(out)(1, 0), 1.0);
}

TEST(Standardize, ConstantColumnBecomesZero) {
  Tape tape;
  const NodeId out = tape.standardize(tape.input(mat({{5}, {5}, {5}})), 1e-8);
  EXPECT_EQ(tape.value(out), Tensor::Zero(3, 1));
}

TEST(Standardize, NeedsTwoSamples) {
  Tape tape;
  try {
    tape.standardize(tape.input(mat({{1}})), 1e-8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("standardization needs >= 2 samples"), std::string::npos);
  }
}

TEST(Standardize, MomentsOfOutput) {
  const double eps = 1e-8;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Tape tape;
    const Tensor x = random_tensor(64, 1, seed, -3.0, 5.0);
    const NodeId out = tape.standardize(tape.input(x), eps);
    const Eigen::ArrayXd z = tape.value(out).col(0).array();
    const double var_x = (x.array() - x.mean()).square().mean();
    EXPECT_LT(std::abs(z.mean()), 1e-12);
    EXPECT_NEAR((z - z.mean()).square().mean(), var_x / (var_x + eps), 1e-9);
  }
}

TEST(Standardize, GradientFlowsThroughBatchStatistics) {
  std::vector<Tensor> params = {random_tensor(7, 1, 5)};
  const auto r = check_gradients(params, [](Tape& t, const std::vector<NodeId>& p) {
    return reduce(t, t.standardize(p[0], 1e-8), 23);
  });
  EXPECT_LT(r.max_rel_error, kTol);
}

TEST(Standardize, ProductOfStandardizedColumnsIsDifferentiable) {
  std::vector<Tensor> params = {random_tensor(9, 1, 6), random_tensor(9, 1, 7)};
  const auto r = check_gradients(params, [](Tape& t, const std::vector<NodeId>& p) {
    return t.mean(t.mul(t.standardize(p[0], 1e-8), t.standardize(p[1], 1e-8)));
  });
  EXPECT_LT(r.max_rel_error, kTol);
}

TEST(ElementwiseOps, GradientsMatchFiniteDifferences) {
  using Op = std::function<NodeId(Tape&, NodeId, NodeId)>;
  const std::vector<std::pair<const char*, Op>> ops = {
      {"add", [](Tape& t, NodeId a, NodeId b) { return t.add(a, b); }},
      {"sub", [](Tape& t, NodeId a, NodeId b) { return t.sub(a, b); }},
      {"mul", [](Tape& t, NodeId a, NodeId b) { return t.mul(a, b); }},
      {"scale", [](Tape& t, NodeId a, NodeId) { return t.scale(a, -2.5); }},
      {"square", [](Tape& t, NodeId a, NodeId) { return t.square(a); }},
      {"concat_cols", [](Tape& t, NodeId a, NodeId b) { return t.concat_cols(a, b); }},
  };
  for (const auto& [name, op] : ops) {
    std::vector<Tensor> params = {random_tensor(3, 4, 11), random_tensor(3, 4, 12)};
    const auto r = check_gradients(params, [&](Tape& t, const std::vector<NodeId>& p) {
      return reduce(t, op(t, p[0], p[1]), 29);
    });
    EXPECT_LT(r.max_rel_error, kTol) << name;
  }
}

TEST(AddRow, BroadcastsBiasAndSumsItsGradient) {
  std::vector<Tensor> params = {random_tensor(4, 3, 13), random_tensor(1, 3, 14)};
  const auto r = check_gradients(params, [](Tape& t, const std::vector<NodeId>& p) {
    return reduce(t, t.add_row(p[0], p[1]), 31);
  });
  EXPECT_LT(r.max_rel_error, kTol);
}

TEST(Reductions, GradientsMatchFiniteDifferences) {
  using Op = std::function<NodeId(Tape&, NodeId)>;
  const std::vector<std::pair<const char*, Op>> ops = {
      {"sum", [](Tape& t, NodeId a) { return t.sum(a); }},
      {"mean", [](Tape& t, NodeId a) { return t.mean(a); }},
      {"log_mean_exp", [](Tape& t, NodeId a) { return t.log_mean_exp(a); }},
  };
  for (const auto& [name, op] : ops) {
    std::vector<Tensor> params = {random_tensor(5, 2, 15)};
    const auto r = check_gradients(params, [&](Tape& t, const std::vector<NodeId>& p) { return op(t, p[0]); });
    EXPECT_LT(r.max_rel_error, kTol) << name;
  }
}

TEST(Reductions, LogMeanExpIsStableForLargeInputs) {
  Tape tape;
  const NodeId out = tape.log_mean_exp(tape.input(mat({{1000}, {1000}})));
  EXPECT_DOUBLE_EQ(tape.scalar(out), 1000.0);
}

TEST(Losses, GradientsMatchFiniteDifferences) {
  Tensor binary(6, 1), onehot = Tensor::Zero(6, 3);
  for (Eigen::Index i = 0; i < 6; ++i) {
    binary(i, 0) = static_cast<double>(i % 2);
    onehot(i, i % 3) = 1.0;
  }
  const Tensor target = random_tensor(6, 1, 40);
  {
    std::vector<Tensor> params = {random_tensor(6, 1, 16)};
    const auto r = check_gradients(params, [&](Tape& t, const std::vector<NodeId>& p) {
      return t.binary_cross_entropy(t.activation(p[0], Activation::sigmoid), t.input(binary));
    });
    EXPECT_LT(r.max_rel_error, kTol) << "bce";
  }
  {
    std::vector<Tensor> params = {random_tensor(6, 3, 17)};
    const auto r = check_gradients(params, [&](Tape& t, const std::vector<NodeId>& p) {
      return t.categorical_cross_entropy(t.activation(p[0], Activation::softmax_rows), t.input(onehot));
    });
    EXPECT_LT(r.max_rel_error, kTol) << "cce";
  }
  {
    std::vector<Tensor> params = {random_tensor(6, 1, 18)};
    const auto r = check_gradients(params, [&](Tape& t, const std::vector<NodeId>& p) {
      return t.mse(p[0], t.input(target));
    });
    EXPECT_LT(r.max_rel_error, kTol) << "mse";
  }
}

TEST(Backward, NonScalarLossIsRejected) {
  Tape tape;
  const NodeId w = tape.parameter(random_tensor(2, 2, 1));
  EXPECT_THROW(tape.backward(w), Error);
}

TEST(Backward, ConstantLossGivesZeroGradients) {
  Tape tape;
  const Tensor w = random_tensor(2, 3, 1);
  const NodeId p = tape.parameter(w);
  const NodeId loss = tape.sum(tape.input(Tensor::Ones(1, 1)));
  const ad::Gradients g = tape.backward(loss);
  ASSERT_TRUE(g.contains(p));
  EXPECT_EQ(g.at(p), Tensor::Zero(2, 3));
}

TEST(Backward, SumOfParametersGivesOnes) {
  Tape tape;
  const Tensor w = random_tensor(3, 2, 1);
  const NodeId p = tape.parameter(w);
  const ad::Gradients g = tape.backward(tape.sum(p));
  EXPECT_EQ(g.at(p), Tensor::Ones(3, 2));
  ASSERT_NE(g.find(w), nullptr);
  EXPECT_EQ(*g.find(w), Tensor::Ones(3, 2));
}

TEST(Backward, SharedParameterAccumulates) {
  Tape tape;
  const Tensor w = random_tensor(1, 1, 3);
  const NodeId a = tape.parameter(w);
  const NodeId b = tape.parameter(w);
  EXPECT_EQ(a, b);
  const ad::Gradients g = tape.backward(tape.sum(tape.add(a, b)));
  EXPECT_DOUBLE_EQ(g.at(a)(0, 0), 2.0);
}

TEST(Backward, ThreeLayerMlpMatchesFiniteDifferences) {
  nn::Mlp mlp = nn::Mlp::init(nn::parse_architecture("FC:8 T, FC:6 Sig, FC:1"), 4, 77);
  const Tensor x = random_tensor(10, 4, 5);
  const Tensor y = random_tensor(10, 1, 6);
  std::vector<Tensor> params;
  for (const auto& layer : mlp.layers()) {
    params.push_back(layer.weight);
    params.push_back(layer.bias);
  }
  const auto r = check_gradients(
      params,
      [&](Tape& t, const std::vector<NodeId>& p) {
        NodeId h = t.input(x);
        const auto& layers = mlp.layers();
        for (std::size_t l = 0; l < layers.size(); ++l) {
          h = t.activation(t.add_row(t.matmul(h, p[2 * l]), p[2 * l + 1]), layers[l].act);
        }
        return t.mse(h, t.input(y));
      },
      20, 99);
  EXPECT_EQ(r.coordinates, 20);
  EXPECT_LT(r.max_rel_error, kTol);
}

TEST(Tape, ForwardIsBitDeterministic) {
  const nn::Mlp mlp = nn::Mlp::init(nn::parse_architecture("FC:16 R, FC:1 Sig"), 3, 5);
  const Tensor x = random_tensor(32, 3, 8);
  Tape a, b;
  const NodeId ya = mlp.forward(a, a.input(x));
  const NodeId yb = mlp.forward(b, b.input(x));
  EXPECT_EQ(a.value(ya), b.value(yb));
}
