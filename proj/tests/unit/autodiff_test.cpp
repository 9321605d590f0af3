// Copyright 2026 The TAKD Workbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "takd/distill.hpp"
#include "takd/errors.hpp"
#include "takd/gradient_check.hpp"
#include "takd/graph.hpp"
#include "takd/network.hpp"
#include "takd/optimizer.hpp"
#include "takd/rng.hpp"

namespace takd::ad {
namespace {

Tensor Ramp(Shape shape, float start = 0.0f) {
  Tensor t(std::move(shape));
  std::iota(t.storage().begin(), t.storage().end(), start);
  return t;
}

BasicTensor<double> RandomTensor(Shape shape, Rng& rng, double lo = -1.0,
                                 double hi = 1.0) {
  BasicTensor<double> t(std::move(shape));
  for (double& v : t.storage()) v = rng.uniform(lo, hi);
  return t;
}

TEST(DenseTest, IdentityWeights) {
  Graph<float> g;
  const Var y =
      g.dense(g.input(matrix<float>({{1, 2}})),
              g.input(matrix<float>({{1, 0}, {0, 1}})), g.input(Tensor({2})));
  EXPECT_EQ(g.value(y), matrix<float>({{1, 2}}));
}

TEST(DenseTest, ZeroInputGivesBias) {
  Graph<float> g;
  const Var y = g.dense(g.input(Tensor({3, 2})),
                        g.input(matrix<float>({{7, -2}, {3, 5}})),
                        g.input(Tensor({2}, {0.25f, -4.0f})));
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_EQ(g.value(y).at(r, 0), 0.25f);
    EXPECT_EQ(g.value(y).at(r, 1), -4.0f);
  }
}

TEST(DenseTest, HandArithmetic) {
  Graph<float> g;
  const Var y = g.dense(g.input(matrix<float>({{1, 1}})),
                        g.input(matrix<float>({{1, 2}, {3, 4}})),
                        g.input(Tensor({2}, {0.5f, -0.5f})));
  // Row 0: 1 + 2 + 0.5, row 1: 3 + 4 - 0.5.
  EXPECT_EQ(g.value(y), matrix<float>({{3.5f, 6.5f}}));
}

TEST(DenseTest, ShapeMismatch) {
  Graph<float> g;
  EXPECT_THROW(g.dense(g.input(Tensor({1, 3})), g.input(Tensor({2, 2})),
                       g.input(Tensor({2}))),
               DimensionError);
}

TEST(Conv2dTest, ZeroKernelGivesBias) {
  Graph<float> g;
  const Var y =
      g.conv2d(g.input(Ramp({1, 1, 4, 4})), g.input(Tensor({1, 1, 3, 3})),
               g.input(Tensor({1}, {1.5f})));
  for (float v : g.value(y).data()) EXPECT_EQ(v, 1.5f);
}

TEST(Conv2dTest, DeltaKernelIsIdentity) {
  Tensor k({1, 1, 3, 3});
  k.storage()[4] = 1.0f;
  Graph<float> g;
  const Tensor x = Ramp({2, 1, 5, 4}, -3.0f);
  const Var y = g.conv2d(g.input(x), g.input(k), g.input(Tensor({1})));
  EXPECT_EQ(g.value(y), x);
}

TEST(Conv2dTest, OnesCountNeighbours) {
  Graph<float> g;
  const Var y =
      g.conv2d(g.input(Tensor({1, 1, 4, 4}, 1.0f)),
               g.input(Tensor({1, 1, 3, 3}, 1.0f)), g.input(Tensor({1})));
  const auto& v = g.value(y).storage();
  // Count of in-bounds cells in each 3x3 window under zero padding.
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      int count = 0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          count += r + dr >= 0 && r + dr < 4 && c + dc >= 0 && c + dc < 4;
        }
      }
      EXPECT_EQ(v[r * 4 + c], static_cast<float>(count));
    }
  }
  EXPECT_EQ(v[5], 9.0f);
  EXPECT_EQ(v[0], 4.0f);
}

TEST(Conv2dTest, ChannelMismatch) {
  Graph<float> g;
  EXPECT_THROW(g.conv2d(g.input(Tensor({1, 2, 4, 4})),
                        g.input(Tensor({1, 3, 3, 3})), g.input(Tensor({1}))),
               DimensionError);
}

TEST(MaxPoolTest, ConstantInput) {
  Graph<float> g;
  const Var y = g.maxpool2d(g.input(Tensor({1, 2, 7, 7}, 3.0f)));
  EXPECT_EQ(g.value(y).shape(), (Shape{1, 2, 3, 3}));
  for (float v : g.value(y).data()) EXPECT_EQ(v, 3.0f);
}

TEST(MaxPoolTest, LargeValueDominatesCoveringWindows) {
  Tensor x({1, 1, 5, 5});
  x.storage()[2 * 5 + 2] = 100.0f;  // covered by all four windows
  Graph<float> g;
  const Var y = g.maxpool2d(g.input(x));
  for (float v : g.value(y).data()) EXPECT_EQ(v, 100.0f);
}

TEST(MaxPoolTest, RampWindowMax) {
  Graph<float> g;
  const Var y = g.maxpool2d(g.input(Ramp({1, 1, 5, 5})));
  // Window (i, j) covers rows 2i..2i+2, cols 2j..2j+2; its max is the
  // bottom-right cell 5 * (2i + 2) + (2j + 2).
  std::vector<float> expected;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) expected.push_back(5 * (2 * i + 2) + 2 * j + 2);
  }
  EXPECT_EQ(g.value(y).storage(), expected);
  EXPECT_EQ(expected, (std::vector<float>{12, 14, 22, 24}));
}

TEST(MaxPoolTest, TooSmall) {
  Graph<float> g;
  EXPECT_THROW(g.maxpool2d(g.input(Tensor({1, 1, 2, 5}))), DimensionError);
}

TEST(MaxPoolTest, GradientGoesToFirstArgmax) {
  Graph<double> g;
  BasicParameterSet<double> ps;
  auto& p = ps.add("x", BasicTensor<double>({1, 1, 3, 3}, 1.0));
  g.backward(g.sum_squares(g.maxpool2d(g.parameter(p))));
  EXPECT_EQ(p.grad.storage()[0], 2.0);
  for (std::size_t i = 1; i < 9; ++i) EXPECT_EQ(p.grad.storage()[i], 0.0);
}

TEST(ReluTest, Cases) {
  Graph<float> g;
  EXPECT_EQ(g.value(g.relu(g.input(Tensor({3}, {-1, -2, -3})))), Tensor({3}));
  const Tensor pos({3}, {1, 2, 3});
  EXPECT_EQ(g.value(g.relu(g.input(pos))), pos);
  EXPECT_EQ(g.value(g.relu(g.input(Tensor({3}, {-1, 0, 2})))),
            Tensor({3}, {0, 0, 2}));
}

TEST(SoftmaxTest, EqualLogitsAreUniform) {
  for (double tau : {0.5, 1.0, 7.0}) {
    Graph<float> g;
    const Var p = g.softmax(g.input(Tensor({2, 4}, 3.0f)), tau);
    for (float v : g.value(p).data()) EXPECT_FLOAT_EQ(v, 0.25f);
  }
}

TEST(SoftmaxTest, ClosedForm) {
  Graph<double> g;
  const Var p = g.softmax(
      g.input(BasicTensor<double>({1, 2}, {0.0, std::log(3.0)})), 1.0);
  // e^0 / (e^0 + 3) and 3 / (1 + 3).
  EXPECT_NEAR(g.value(p).storage()[0], 1.0 / 4.0, 1e-15);
  EXPECT_NEAR(g.value(p).storage()[1], 3.0 / 4.0, 1e-15);
}

TEST(SoftmaxTest, HugeTemperatureIsNearlyUniform) {
  Rng rng(5);
  Tensor x({4, 6});
  for (float& v : x.storage()) v = static_cast<float>(rng.uniform(-50, 50));
  Graph<float> g;
  for (float v : g.value(g.softmax(g.input(x), 1e6)).data()) {
    EXPECT_NEAR(v, 1.0 / 6.0, 1e-3);
  }
}

TEST(SoftmaxTest, NonPositiveTemperature) {
  Graph<float> g;
  const Var x = g.input(Tensor({1, 2}));
  EXPECT_THROW(g.softmax(x, 0.0), ParameterError);
  EXPECT_THROW(g.softmax(x, -1.0), ParameterError);
}

TEST(SoftmaxTest, RowsSumToOne) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor x({3, 1 + rng.below(12)});
    for (float& v : x.storage()) v = static_cast<float>(rng.uniform(-50, 50));
    Graph<float> g;
    const Tensor& p = g.value(g.softmax(g.input(x), rng.uniform(0.5, 20)));
    for (std::size_t r = 0; r < 3; ++r) {
      double sum = 0;
      for (std::size_t c = 0; c < p.dim(1); ++c) sum += p.at(r, c);
      EXPECT_NEAR(sum, 1.0, 1e-6);
    }
  }
}

TEST(CrossEntropyTest, OneHotCorrectIsZero) {
  Graph<float> g;
  const std::vector<int> labels{1, 0};
  const Var l =
      g.cross_entropy(g.input(matrix<float>({{0, 1}, {1, 0}})), labels);
  EXPECT_EQ(g.value(l).item(), 0.0f);
}

TEST(CrossEntropyTest, UniformIsLogC) {
  Graph<double> g;
  const std::vector<int> labels{2};
  const Var l =
      g.cross_entropy(g.input(BasicTensor<double>({1, 5}, 0.2)), labels);
  EXPECT_NEAR(g.value(l).item(), std::log(5.0), 1e-12);
}

TEST(CrossEntropyTest, HandArithmetic) {
  Graph<double> g;
  const std::vector<int> labels{1};
  const Var l = g.cross_entropy(
      g.input(BasicTensor<double>({1, 2}, {0.25, 0.75})), labels);
  EXPECT_NEAR(g.value(l).item(), -std::log(0.75), 1e-12);
  EXPECT_NEAR(g.value(l).item(), 0.2877, 1e-4);
}

TEST(CrossEntropyTest, LabelOutOfRange) {
  Graph<float> g;
  const Var p = g.input(Tensor({1, 2}, 0.5f));
  const std::vector<int> high{2}, low{-1};
  EXPECT_THROW(g.cross_entropy(p, high), IndexError);
  EXPECT_THROW(g.cross_entropy(p, low), IndexError);
}

TEST(KlDivergenceTest, IdenticalIsZero) {
  Graph<float> g;
  const Tensor p = matrix<float>({{0.1f, 0.2f, 0.7f}});
  EXPECT_EQ(g.value(g.kl_divergence(g.input(p), g.input(p))).item(), 0.0f);
}

TEST(KlDivergenceTest, HandArithmetic) {
  Graph<double> g;
  const Var source = g.input(BasicTensor<double>({1, 2}, {0.5, 0.5}));
  const Var target = g.input(BasicTensor<double>({1, 2}, {0.25, 0.75}));
  const double kl = g.value(g.kl_divergence(source, target)).item();
  const double expected =
      0.25 * std::log(0.25 / 0.5) + 0.75 * std::log(0.75 / 0.5);
  EXPECT_NEAR(kl, expected, 1e-12);
  EXPECT_NEAR(kl, 0.1308, 1e-4);
}

TEST(KlDivergenceTest, NonNegativeOnRandomPairs) {
  Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t c = 2 + rng.below(8);
    BasicTensor<double> p({1, c}), q({1, c});
    double sp = 0, sq = 0;
    for (std::size_t i = 0; i < c; ++i) {
      sp += p.storage()[i] = rng.uniform();
      sq += q.storage()[i] = rng.uniform();
    }
    for (std::size_t i = 0; i < c; ++i) {
      p.storage()[i] /= sp;
      q.storage()[i] /= sq;
    }
    Graph<double> g;
    EXPECT_GE(g.value(g.kl_divergence(g.input(p), g.input(q))).item(), -1e-9);
    EXPECT_EQ(g.value(g.kl_divergence(g.input(p), g.input(p))).item(), 0.0);
  }
}

TEST(KlDivergenceTest, NegativeEntry) {
  Graph<float> g;
  EXPECT_THROW(g.kl_divergence(g.input(matrix<float>({{0.5f, 0.5f}})),
                               g.input(matrix<float>({{-0.1f, 1.1f}}))),
               DomainError);
}

TEST(BackwardTest, SumSquaresGradient) {
  BasicParameterSet<double> ps;
  auto& w = ps.add("w", BasicTensor<double>({3}, {1.5, -2.0, 0.25}));
  Graph<double> g;
  g.backward(g.sum_squares(g.parameter(w)));
  EXPECT_EQ(w.grad.storage(), (std::vector<double>{3.0, -4.0, 0.5}));
}

TEST(BackwardTest, ConstantLossGivesZeroGradient) {
  BasicParameterSet<double> ps;
  auto& w = ps.add("w", BasicTensor<double>({2}, {1.0, 2.0}));
  Graph<double> g;
  g.parameter(w);
  g.backward(g.sum_squares(g.input(BasicTensor<double>({2}, 3.0))));
  EXPECT_EQ(w.grad, BasicTensor<double>({2}));
}

TEST(BackwardTest, NonScalarLoss) {
  Graph<float> g;
  EXPECT_THROW(g.backward(g.input(Tensor({2}))), UsageError);
}

TEST(SgdTest, NesterovStep) {
  ParameterSet ps;
  auto& w = ps.add("w", Tensor({1}, 1.0f));
  w.grad.storage()[0] = 1.0f;
  OptimizerConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.momentum = 0.9;
  cfg.nesterov = true;
  sgd_nesterov_step(ps, cfg);
  EXPECT_FLOAT_EQ(w.velocity.storage()[0], 1.0f);
  EXPECT_FLOAT_EQ(w.value.storage()[0], 1.0f - 0.1f * (1.0f + 0.9f * 1.0f));
  EXPECT_NEAR(w.value.storage()[0], 0.81, 1e-6);
}

TEST(SgdTest, NoMomentumIsPlainDescent) {
  Rng rng(2);
  ParameterSet ps;
  auto& w = ps.add("w", Tensor({16}));
  for (std::size_t i = 0; i < 16; ++i) {
    w.value.storage()[i] = static_cast<float>(rng.uniform(-1, 1));
    w.grad.storage()[i] = static_cast<float>(rng.uniform(-1, 1));
  }
  const Tensor before = w.value;
  OptimizerConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.momentum = 0.0;
  sgd_nesterov_step(ps, cfg);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_EQ(w.value.storage()[i],
              before.storage()[i] - 0.05f * w.grad.storage()[i]);
  }
}

TEST(SgdTest, ZeroGradientLeavesParameters) {
  ParameterSet ps;
  auto& w = ps.add("w", Tensor({4}, 0.3f));
  sgd_nesterov_step(ps, OptimizerConfig{});
  EXPECT_EQ(w.value, Tensor({4}, 0.3f));
}

TEST(SgdTest, SkipsNonTrainable) {
  ParameterSet ps;
  auto& w = ps.add("stat", Tensor({2}, 1.0f), false);
  w.grad.fill(5.0f);
  sgd_nesterov_step(ps, OptimizerConfig{});
  EXPECT_EQ(w.value, Tensor({2}, 1.0f));
}

TEST(GradientCheckTest, LinearModelIsExact) {
  Rng rng(1);
  BasicParameterSet<double> ps;
  ps.add("w", RandomTensor({3, 4}, rng));
  ps.add("b", RandomTensor({3}, rng));
  const auto x = RandomTensor({5, 4}, rng);
  const auto target = RandomTensor({5, 3}, rng);
  const LossBuilder loss = [&](Graph<double>& g, CheckParameterSet& p) {
    const Var y = g.dense(g.input(x), g.parameter(p[0]), g.parameter(p[1]));
    return g.mean_squared_error(y, g.input(target));
  };
  const auto report = gradient_check(ps, loss);
  EXPECT_TRUE(report.passed);
  EXPECT_LT(report.max_rel_error, 1e-8);
}

TEST(GradientCheckTest, TwoLayerMlp) {
  const auto spec = zoo::make_mlp(1, 8, 4, 3, false);
  const auto params = zoo::init_parameters(spec, 0);
  Rng rng(0);
  Tensor x({6, 4});
  for (float& v : x.storage()) v = static_cast<float>(rng.uniform(-1, 1));
  const std::vector<int> labels{0, 1, 2, 0, 1, 2};
  const auto report = distill::check_model_gradients(spec, params, x, labels,
                                                     nullptr, 0.0, 1.0);
  EXPECT_TRUE(report.passed);
  EXPECT_LT(report.max_rel_error, 1e-4);
}

TEST(GradientCheckTest, CorruptedGradientFails) {
  Rng rng(4);
  BasicParameterSet<double> ps;
  ps.add("w", RandomTensor({2, 3}, rng));
  ps.add("b", RandomTensor({2}, rng));
  const auto x = RandomTensor({4, 3}, rng);
  const LossBuilder loss = [&](Graph<double>& g, CheckParameterSet& p) {
    return g.sum_squares(
        g.dense(g.input(x), g.parameter(p[0]), g.parameter(p[1])));
  };
  auto analytic = analytic_gradients(ps, loss);
  EXPECT_TRUE(compare_with_finite_differences(ps, loss, analytic).passed);
  analytic[0].storage()[3] += 1.0;
  const auto report = compare_with_finite_differences(ps, loss, analytic);
  EXPECT_FALSE(report.passed);
  EXPECT_FALSE(report.parameters[0].passed);
  EXPECT_TRUE(report.parameters[1].passed);
}

// Every op against central differences on random inputs in [-1, 1].
class OpGradientTest : public ::testing::TestWithParam<int> {};

TEST_P(OpGradientTest, MatchesFiniteDifferences) {
  Rng rng(100 + GetParam());
  BasicParameterSet<double> ps;
  LossBuilder loss;
  const std::vector<int> labels{1, 0};
  const auto target = RandomTensor({2, 3}, rng, 0.05, 1.0);
  switch (GetParam()) {
    case 0:  // dense + relu
      ps.add("x", RandomTensor({2, 4}, rng));
      ps.add("w", RandomTensor({3, 4}, rng));
      ps.add("b", RandomTensor({3}, rng));
      loss = [](Graph<double>& g, CheckParameterSet& p) {
        return g.sum_squares(g.relu(
            g.dense(g.parameter(p[0]), g.parameter(p[1]), g.parameter(p[2]))));
      };
      break;
    case 1:  // conv2d + maxpool
      ps.add("x", RandomTensor({2, 2, 5, 5}, rng));
      ps.add("k", RandomTensor({3, 2, 3, 3}, rng));
      ps.add("b", RandomTensor({3}, rng));
      loss = [](Graph<double>& g, CheckParameterSet& p) {
        return g.sum_squares(g.maxpool2d(
            g.conv2d(g.parameter(p[0]), g.parameter(p[1]), g.parameter(p[2]))));
      };
      break;
    case 2:  // softmax + cross entropy
      ps.add("z", RandomTensor({2, 3}, rng));
      loss = [&](Graph<double>& g, CheckParameterSet& p) {
        return g.cross_entropy(g.softmax(g.parameter(p[0]), 2.5), labels);
      };
      break;
    case 3:  // kl divergence through softmax on the source side
      ps.add("z", RandomTensor({2, 3}, rng));
      loss = [&](Graph<double>& g, CheckParameterSet& p) {
        const Var t = g.softmax(g.input(target), 1.0);
        return g.kl_divergence(g.softmax(g.parameter(p[0]), 4.0), t);
      };
      break;
    case 4: {  // batch norm in training mode, statistics frozen
      ps.add("x", RandomTensor({6, 4}, rng));
      ps.add("scale", RandomTensor({4}, rng, 0.5, 1.5));
      ps.add("shift", RandomTensor({4}, rng));
      const auto weights = RandomTensor({6, 4}, rng);
      loss = [weights](Graph<double>& g, CheckParameterSet& p) {
        const Var y = g.batch_norm(g.parameter(p[0]), g.parameter(p[1]),
                                   g.parameter(p[2]), nullptr, nullptr, true);
        return g.mean_squared_error(y, g.input(weights));
      };
      break;
    }
    default:  // flatten, scale, add
      ps.add("x", RandomTensor({2, 1, 2, 2}, rng));
      ps.add("y", RandomTensor({2, 4}, rng));
      loss = [](Graph<double>& g, CheckParameterSet& p) {
        const Var s = g.add(g.scale(g.flatten(g.parameter(p[0])), -1.5),
                            g.parameter(p[1]));
        return g.sum_squares(s);
      };
  }
  const auto report = gradient_check(ps, loss);
  EXPECT_TRUE(report.passed) << "max rel error " << report.max_rel_error;
  std::size_t checked = 0;
  for (const auto& pc : report.parameters) checked += pc.checked;
  EXPECT_GT(checked, 0u);
}

INSTANTIATE_TEST_SUITE_P(AllOps, OpGradientTest, ::testing::Range(0, 6));

}  // namespace
}  // namespace takd::ad
