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

#include "leakchain/nn/optim.hpp"

#include <cmath>
#include <string>

namespace leakchain::nn {

OptimState OptimState::for_network(const Mlp& net, const AdamWConfig& config) {
  return OptimState{config, Gradients::zeros_like(net), Gradients::zeros_like(net), 0};
}

namespace {

template <typename Param, typename Grad>
void UpdateBlock(Param& p, const Grad& g, Param& m, Param& v, const AdamWConfig& c,
                 double correction1, double correction2) {
  m = c.beta1 * m + (1.0 - c.beta1) * g;
  v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseAbs2();
  if (c.weight_decay != 0.0) p *= 1.0 - c.lr * c.weight_decay;
  p.array() -= c.lr * (m.array() / correction1) /
               ((v.array() / correction2).sqrt() + c.eps);
}

}  // namespace

void adamw_step(Mlp& net, const Gradients& grads, OptimState& state) {
  auto& layers = net.layers();
  if (grads.layers.size() != layers.size() ||
      state.first_moment.layers.size() != layers.size()) {
    throw std::invalid_argument("optimizer state does not match network");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (grads.layers[l].weight.rows() != layers[l].weight.rows() ||
        grads.layers[l].weight.cols() != layers[l].weight.cols() ||
        grads.layers[l].bias.size() != layers[l].bias.size()) {
      throw std::invalid_argument("gradient shape mismatch at layer " + std::to_string(l));
    }
  }
  if (!grads.all_finite()) throw TrainingDivergence("nonfinite gradient in optimizer step");

  ++state.step;
  const auto& c = state.config;
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < layers.size(); ++l) {
    UpdateBlock(layers[l].weight, grads.layers[l].weight, state.first_moment.layers[l].weight,
                state.second_moment.layers[l].weight, c, correction1, correction2);
    UpdateBlock(layers[l].bias, grads.layers[l].bias, state.first_moment.layers[l].bias,
                state.second_moment.layers[l].bias, c, correction1, correction2);
  }
}

}  // namespace leakchain::nn
