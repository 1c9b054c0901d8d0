// Copyright 2026 The LeakChain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "leakchain/nn/grad_check.hpp"

#include <vector>

#include "gtest/gtest.h"
#include "leakchain/nn/loss.hpp"

namespace leakchain::nn {
namespace {

// Smallest |pre-activation| over hidden layers, to keep samples off the kinks.
double KinkMargin(const Mlp& net, const Matrix& x) {
  const auto fwd = forward(net, x);
  double margin = 1e300;
  for (std::size_t l = 0; l + 1 < net.depth(); ++l) {
    margin = std::min(margin, fwd.cache.pre_activations[l].cwiseAbs().minCoeff());
  }
  return margin;
}

LossWithGradients CrossEntropyLoss(const Matrix& x, const std::vector<int>& y) {
  return [x, y](const Mlp& net) {
    const auto fwd = forward(net, x);
    const auto loss = cross_entropy(fwd.output, y);
    return std::pair{loss.loss, backward(net, fwd.cache, loss.grad).params};
  };
}

TEST(GradCheckTest, RandomRectifierNetsPassAt1e4) {
  Rng rng(2024);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> cls(0, 3);
  int checked_nets = 0;
  for (int trial = 0; trial < 40 && checked_nets < 10; ++trial) {
    const std::vector<int> widths{5, 12, 9, 4};
    const Mlp net = Mlp::initialized(widths, rng);
    Matrix x = Matrix::NullaryExpr(6, 5, [&] { return g(rng); });
    if (KinkMargin(net, x) < 1e-3) continue;
    std::vector<int> y(6);
    for (int& v : y) v = cls(rng);
    const auto result = finite_diff_check(net, CrossEntropyLoss(x, y), 1e-4);
    EXPECT_TRUE(result.pass) << "worst " << result.worst_relative_error;
    EXPECT_EQ(result.checked, net.parameter_count());
    ++checked_nets;
  }
  EXPECT_EQ(checked_nets, 10);
}

TEST(GradCheckTest, LinearSquaredLossPassesAt1e6) {
  Rng rng(8);
  std::normal_distribution<double> g;
  const std::vector<int> widths{4, 3};
  const Mlp net = Mlp::initialized(widths, rng);
  Matrix x = Matrix::NullaryExpr(7, 4, [&] { return g(rng); });
  Matrix t = Matrix::NullaryExpr(7, 3, [&] { return g(rng); });
  LossWithGradients fn = [&](const Mlp& m) {
    const auto fwd = forward(m, x);
    const auto loss = mean_squared_error(fwd.output, t);
    return std::pair{loss.loss, backward(m, fwd.cache, loss.grad).params};
  };
  const auto result = finite_diff_check(net, fn, 1e-6);
  EXPECT_TRUE(result.pass) << "worst " << result.worst_relative_error;
}

TEST(GradCheckTest, CorruptedGradientFails) {
  Rng rng(9);
  std::normal_distribution<double> g;
  const std::vector<int> widths{3, 6, 2};
  const Mlp net = Mlp::initialized(widths, rng);
  Matrix x = Matrix::NullaryExpr(5, 3, [&] { return g(rng); });
  const std::vector<int> y{0, 1, 1, 0, 1};
  const auto honest = CrossEntropyLoss(x, y);
  LossWithGradients corrupted = [&](const Mlp& m) {
    auto [loss, grads] = honest(m);
    grads.layers[1].weight(2, 1) += 0.05;
    return std::pair{loss, grads};
  };
  const auto result = finite_diff_check(net, corrupted, 1e-4);
  EXPECT_FALSE(result.pass);
  EXPECT_GT(result.worst_relative_error, 1e-2);
}

TEST(GradCheckTest, InputGradientMatches) {
  Rng rng(10);
  std::normal_distribution<double> g;
  const std::vector<int> widths{4, 10, 3};
  const Mlp net = Mlp::initialized(widths, rng);
  Matrix x = Matrix::NullaryExpr(5, 4, [&] { return g(rng); });
  ASSERT_GT(KinkMargin(net, x), 1e-4);
  const std::vector<int> y{0, 2, 1, 1, 0};
  auto loss = [&](const Matrix& in) { return cross_entropy(net.predict(in), y).loss; };
  const auto fwd = forward(net, x);
  const auto analytic = backward(net, fwd.cache, cross_entropy(fwd.output, y).grad).input;
  const auto result = check_input_gradient(x, loss, analytic, 1e-4);
  EXPECT_TRUE(result.pass) << "worst " << result.worst_relative_error;
  EXPECT_EQ(result.checked, 20u);
}

TEST(GradCheckTest, RelativeErrorFloor) {
  EXPECT_NEAR(relative_error(1.0, 1.1), 0.1 / 1.1, 1e-15);
  EXPECT_DOUBLE_EQ(relative_error(0.0, 1e-9), 1e-9 / kRelativeErrorFloor);
}

}  // namespace
}  // namespace leakchain::nn
