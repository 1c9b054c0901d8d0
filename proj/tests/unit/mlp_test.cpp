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

#include "leakchain/nn/mlp.hpp"

#include <sstream>
#include <vector>

#include "gtest/gtest.h"
#include "leakchain/nn/checkpoint.hpp"
#include "leakchain/nn/grad_check.hpp"
#include "leakchain/nn/loss.hpp"

namespace leakchain::nn {
namespace {

Dense MakeDense(Matrix w, RowVector b) { return Dense{std::move(w), std::move(b)}; }

TEST(MlpTest, ZeroWeightsEmitBias) {
  RowVector b(3);
  b << 0.5, -1.0, 2.0;
  Mlp net({MakeDense(Matrix::Zero(4, 3), b)});
  Rng rng(3);
  std::normal_distribution<double> g;
  Matrix x = Matrix::NullaryExpr(5, 4, [&] { return g(rng); });
  const Matrix y = forward(net, x).output;
  for (Eigen::Index r = 0; r < y.rows(); ++r) EXPECT_EQ(y.row(r), b);
}

TEST(MlpTest, IdentityLayerPassesInputThrough) {
  Mlp net({MakeDense(Matrix::Identity(3, 3), RowVector::Zero(3))});
  Matrix x(2, 3);
  x << 1, -2, 3, 0.25, 0, -7;
  EXPECT_EQ(forward(net, x).output, x);
  EXPECT_EQ(net.predict(x), x);
}

TEST(MlpTest, HandComputedTwoLayerNet) {
  // h = relu(x W1 + b1), y = h W2 + b2
  Matrix w1(2, 2);
  w1 << 1, -1, 2, 1;
  RowVector b1(2);
  b1 << 0, -1;
  Matrix w2(2, 2);
  w2 << 1, 0, -1, 3;
  RowVector b2(2);
  b2 << 0.5, 0;
  Mlp net({MakeDense(w1, b1), MakeDense(w2, b2)});
  Matrix x(2, 2);
  x << 1, 1,    // pre = (3, -1) -> h = (3, 0) -> y = (3.5, 0)
      -1, 2;    // pre = (3, 2)  -> h = (3, 2) -> y = (1.5, 6)
  Matrix expected(2, 2);
  expected << 3.5, 0, 1.5, 6;
  EXPECT_TRUE(forward(net, x).output.isApprox(expected, 0.0));
}

TEST(MlpTest, RejectsMismatchedShapes) {
  EXPECT_THROW(Mlp({MakeDense(Matrix::Zero(2, 3), RowVector::Zero(2))}), std::invalid_argument);
  EXPECT_THROW(Mlp({MakeDense(Matrix::Zero(2, 3), RowVector::Zero(3)),
                    MakeDense(Matrix::Zero(4, 1), RowVector::Zero(1))}),
               std::invalid_argument);
  Mlp net({MakeDense(Matrix::Zero(2, 1), RowVector::Zero(1))});
  EXPECT_THROW(forward(net, Matrix::Zero(3, 5)), std::invalid_argument);
  const auto fwd = forward(net, Matrix::Zero(3, 2));
  EXPECT_THROW(backward(net, fwd.cache, Matrix::Zero(4, 1)), std::invalid_argument);
}

TEST(MlpTest, InitializationScale) {
  Rng rng(11);
  const std::vector<int> widths{400, 300, 200};
  const Mlp net = Mlp::initialized(widths, rng);
  ASSERT_EQ(net.depth(), 2u);
  EXPECT_EQ(net.parameter_count(), 400u * 300 + 300 + 300 * 200 + 200);
  const Matrix& w0 = net.layers()[0].weight;
  const Matrix& w1 = net.layers()[1].weight;
  const double var0 = w0.squaredNorm() / static_cast<double>(w0.size());
  const double var1 = w1.squaredNorm() / static_cast<double>(w1.size());
  EXPECT_NEAR(var0, 2.0 / 400, 0.05 * 2.0 / 400);
  EXPECT_NEAR(var1, 1.0 / 300, 0.05 * 1.0 / 300);
  EXPECT_TRUE(net.layers()[0].bias.isZero(0.0));
}

TEST(MlpTest, ZeroUpstreamGradientGivesZeroGradients) {
  Rng rng(5);
  const std::vector<int> widths{3, 8, 8, 2};
  const Mlp net = Mlp::initialized(widths, rng);
  Matrix x = Matrix::Random(6, 3);
  const auto fwd = forward(net, x);
  const auto grads = backward(net, fwd.cache, Matrix::Zero(6, 2));
  EXPECT_EQ(grads.params.squared_norm(), 0.0);
  EXPECT_TRUE(grads.input.isZero(0.0));
}

TEST(MlpTest, LinearLeastSquaresClosedForm) {
  // L = 1/(2B) ||X w + b - y||^2 -> dL/dw = X^T r / B, dL/db = sum(r) / B
  Rng rng(7);
  std::normal_distribution<double> g;
  const int batch = 9;
  Matrix x = Matrix::NullaryExpr(batch, 4, [&] { return g(rng); });
  Matrix y = Matrix::NullaryExpr(batch, 1, [&] { return g(rng); });
  Matrix w = Matrix::NullaryExpr(4, 1, [&] { return g(rng); });
  RowVector b = RowVector::Constant(1, 0.3);
  Mlp net({MakeDense(w, b)});
  const auto fwd = forward(net, x);
  const auto loss = mean_squared_error(fwd.output, y);
  const auto grads = backward(net, fwd.cache, loss.grad);
  const Matrix residual = (x * w).rowwise() + b - y;
  const Matrix expected_w = x.transpose() * residual / batch;
  EXPECT_TRUE(grads.params.layers[0].weight.isApprox(expected_w, 1e-12));
  EXPECT_NEAR(grads.params.layers[0].bias(0), residual.sum() / batch, 1e-12);
  EXPECT_TRUE(grads.input.isApprox(residual * w.transpose() / batch, 1e-12));
}

TEST(MlpTest, ClipGlobalNorm) {
  Mlp net({MakeDense(Matrix::Zero(1, 2), RowVector::Zero(2))});
  Gradients a = Gradients::zeros_like(net);
  Gradients b = Gradients::zeros_like(net);
  a.layers[0].weight << 3, 0;
  b.layers[0].bias << 0, 4;
  std::vector<Gradients*> all{&a, &b};
  EXPECT_DOUBLE_EQ(clip_global_norm(all, 10.0), 5.0);
  EXPECT_DOUBLE_EQ(a.layers[0].weight(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(clip_global_norm(all, 1.0), 5.0);
  EXPECT_NEAR(a.layers[0].weight(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(b.layers[0].bias(1), 0.8, 1e-15);
}

TEST(MlpTest, ConcatAndOneHot) {
  Matrix a(2, 1), b(2, 2);
  a << 1, 2;
  b << 3, 4, 5, 6;
  const std::vector<const Matrix*> blocks{&a, &b};
  Matrix expected(2, 3);
  expected << 1, 3, 4, 2, 5, 6;
  EXPECT_EQ(concat_columns(blocks), expected);
  const std::vector<int> labels{2, 0};
  Matrix oh(2, 3);
  oh << 0, 0, 1, 1, 0, 0;
  EXPECT_EQ(one_hot(labels, 3), oh);
  const std::vector<int> bad{3};
  EXPECT_THROW(one_hot(bad, 3), std::out_of_range);
}

TEST(CheckpointTest, RoundTripIsBitExact) {
  Rng rng(21);
  const std::vector<int> widths{5, 7, 3};
  Mlp net = Mlp::initialized(widths, rng);
  net.layers()[1].bias << 1.0 / 3.0, -2e-300, 0.1;
  std::stringstream ss;
  save_mlp(ss, net);
  const Mlp back = load_mlp(ss);
  ASSERT_EQ(back.depth(), net.depth());
  for (std::size_t l = 0; l < net.depth(); ++l) {
    EXPECT_EQ(back.layers()[l].weight, net.layers()[l].weight);
    EXPECT_EQ(back.layers()[l].bias, net.layers()[l].bias);
  }
}

TEST(CheckpointTest, RejectsCorruptInput) {
  std::stringstream wrong_magic("not-a-checkpoint 1");
  EXPECT_THROW(load_mlp(wrong_magic), CheckpointError);
  std::stringstream truncated("leakchain-mlp 1\nlayers 1\ndense 2 1\n0.5\n");
  EXPECT_THROW(load_mlp(truncated), CheckpointError);
  std::stringstream chain("leakchain-mlp 1\nlayers 2\ndense 1 2\n1 1\n0 0\ndense 3 1\n1\n1\n1\n0\n");
  EXPECT_THROW(load_mlp(chain), CheckpointError);
}

}  // namespace
}  // namespace leakchain::nn
