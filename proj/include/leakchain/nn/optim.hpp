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

#ifndef LEAKCHAIN_NN_OPTIM_HPP_
#define LEAKCHAIN_NN_OPTIM_HPP_

#include <cstdint>
#include <stdexcept>

#include "leakchain/nn/mlp.hpp"

namespace leakchain::nn {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;

  friend bool operator==(const AdamWConfig&, const AdamWConfig&) = default;
};

// Moment accumulators shaped like the network they optimize.
struct OptimState {
  AdamWConfig config;
  Gradients first_moment;
  Gradients second_moment;
  std::int64_t step = 0;

  static OptimState for_network(const Mlp& net, const AdamWConfig& config);
};

// Raised when a gradient or update turns nonfinite.
class TrainingDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One bias-corrected Adam step with decoupled weight decay:
//   p <- p - lr * decay * p - lr * m_hat / (sqrt(v_hat) + eps)
void adamw_step(Mlp& net, const Gradients& grads, OptimState& state);

}  // namespace leakchain::nn

#endif  // LEAKCHAIN_NN_OPTIM_HPP_
