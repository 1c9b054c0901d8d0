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

#include <algorithm>
#include <cmath>

namespace leakchain::nn {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), kRelativeErrorFloor});
  return std::abs(analytic - numeric) / denom;
}

namespace {

// Perturbs each entry of `block` in place and records the worst error.
template <typename Block, typename Analytic, typename Eval>
void CheckBlock(Block& block, const Analytic& analytic, double step, const Eval& eval,
                GradCheckResult& result) {
  for (Eigen::Index i = 0; i < block.size(); ++i) {
    const double saved = block.data()[i];
    block.data()[i] = saved + step;
    const double up = eval();
    block.data()[i] = saved - step;
    const double down = eval();
    block.data()[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double err = relative_error(analytic.data()[i], numeric);
    if (!std::isfinite(err)) {
      result.worst_relative_error = INFINITY;
    } else {
      result.worst_relative_error = std::max(result.worst_relative_error, err);
    }
    ++result.checked;
  }
}

}  // namespace

GradCheckResult finite_diff_check(const Mlp& net, const LossWithGradients& fn,
                                  double tolerance, double step) {
  GradCheckResult result;
  const auto [loss, analytic] = fn(net);
  (void)loss;
  if (analytic.layers.size() != net.depth()) return result;

  Mlp probe = net;
  auto eval = [&] { return fn(probe).first; };
  for (std::size_t l = 0; l < probe.depth(); ++l) {
    CheckBlock(probe.layers()[l].weight, analytic.layers[l].weight, step, eval, result);
    CheckBlock(probe.layers()[l].bias, analytic.layers[l].bias, step, eval, result);
  }
  result.pass = result.worst_relative_error < tolerance;
  return result;
}

GradCheckResult check_input_gradient(const Matrix& x,
                                     const std::function<double(const Matrix&)>& loss,
                                     const Matrix& analytic, double tolerance,
                                     double step) {
  GradCheckResult result;
  if (analytic.rows() != x.rows() || analytic.cols() != x.cols()) return result;
  Matrix probe = x;
  auto eval = [&] { return loss(probe); };
  CheckBlock(probe, analytic, step, eval, result);
  result.pass = result.worst_relative_error < tolerance;
  return result;
}

}  // namespace leakchain::nn
