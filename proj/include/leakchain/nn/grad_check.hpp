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

#ifndef LEAKCHAIN_NN_GRAD_CHECK_HPP_
#define LEAKCHAIN_NN_GRAD_CHECK_HPP_

#include <cstddef>
#include <functional>
#include <utility>

#include "leakchain/nn/mlp.hpp"

namespace leakchain::nn {

// Denominator floor for relative error, so that entries whose analytic and
// numeric values are both ~0 compare on absolute error instead.
inline constexpr double kRelativeErrorFloor = 1e-6;

struct GradCheckResult {
  bool pass = false;
  double worst_relative_error = 0.0;
  std::size_t checked = 0;
};

// |a - n| / max(|a|, |n|, kRelativeErrorFloor)
double relative_error(double analytic, double numeric);

// Returns the loss and its analytic parameter gradients at `net`.
using LossWithGradients = std::function<std::pair<double, Gradients>(const Mlp&)>;

// Compares analytic gradients against central differences, one parameter at a
// time. Reports failure rather than throwing.
GradCheckResult finite_diff_check(const Mlp& net, const LossWithGradients& fn,
                                  double tolerance, double step = 1e-5);

// Same comparison for a gradient with respect to an input matrix.
GradCheckResult check_input_gradient(const Matrix& x,
                                     const std::function<double(const Matrix&)>& loss,
                                     const Matrix& analytic, double tolerance,
                                     double step = 1e-5);

}  // namespace leakchain::nn

#endif  // LEAKCHAIN_NN_GRAD_CHECK_HPP_
