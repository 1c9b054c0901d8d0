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

#include "leakchain/nn/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace leakchain::nn {

LossResult cross_entropy(const Matrix& logits, std::span<const int> labels) {
  const Eigen::Index batch = logits.rows();
  if (batch == 0) throw std::invalid_argument("cross-entropy of an empty batch");
  if (static_cast<std::size_t>(batch) != labels.size()) {
    throw std::invalid_argument("label count does not match logits");
  }
  LossResult r;
  r.grad.resize(batch, logits.cols());
  double total = 0.0;
  for (Eigen::Index b = 0; b < batch; ++b) {
    const int y = labels[b];
    if (y < 0 || y >= logits.cols()) {
      throw std::out_of_range("label " + std::to_string(y) + " outside logits range");
    }
    const double shift = logits.row(b).maxCoeff();
    const auto e = (logits.row(b).array() - shift).exp();
    const double z = e.sum();
    total += std::log(z) - (logits(b, y) - shift);
    r.grad.row(b) = (e / z).matrix();
    r.grad(b, y) -= 1.0;
  }
  r.loss = total / batch;
  r.grad /= static_cast<double>(batch);
  return r;
}

LossResult mean_squared_error(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw std::invalid_argument("prediction and target shapes differ");
  }
  if (pred.rows() == 0) throw std::invalid_argument("squared error of an empty batch");
  const double batch = static_cast<double>(pred.rows());
  const Matrix diff = pred - target;
  return {0.5 * diff.squaredNorm() / batch, diff / batch};
}

std::vector<int> argmax_rows(const Matrix& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index b = 0; b < scores.rows(); ++b) {
    int best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c) {
      if (scores(b, c) > scores(b, best)) best = static_cast<int>(c);
    }
    out[b] = best;
  }
  return out;
}

double accuracy(const Matrix& scores, std::span<const int> labels) {
  if (labels.empty()) throw std::invalid_argument("accuracy of an empty set");
  const auto pred = argmax_rows(scores);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += pred[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace leakchain::nn
