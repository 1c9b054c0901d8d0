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

#ifndef LEAKCHAIN_NN_LOSS_HPP_
#define LEAKCHAIN_NN_LOSS_HPP_

#include <span>
#include <vector>

#include "leakchain/nn/mlp.hpp"

namespace leakchain::nn {

struct LossResult {
  double loss = 0.0;  // nats for cross-entropy
  Matrix grad;        // dL/d(input)
};

// Mean negative log-softmax of the true class; grad = (softmax - onehot) / B.
LossResult cross_entropy(const Matrix& logits, std::span<const int> labels);

// (1 / 2B) * sum ||pred - target||^2; grad = (pred - target) / B.
LossResult mean_squared_error(const Matrix& pred, const Matrix& target);

// Row-wise argmax; ties go to the lowest index.
std::vector<int> argmax_rows(const Matrix& scores);

// Fraction of rows whose argmax equals the label.
double accuracy(const Matrix& scores, std::span<const int> labels);

}  // namespace leakchain::nn

#endif  // LEAKCHAIN_NN_LOSS_HPP_
