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

#include "leakchain/eval/probe.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "leakchain/nn/loss.hpp"
#include "leakchain/nn/optim.hpp"

namespace leakchain::eval {

ProbeResult train_probe(const Matrix& representations, std::span<const int> targets,
                        int classes, const ProbeConfig& config) {
  const Eigen::Index rows = representations.rows();
  if (static_cast<std::size_t>(rows) != targets.size()) {
    throw std::invalid_argument("probe targets do not match representation rows");
  }
  if (rows < 4) throw std::invalid_argument("probe needs at least 4 rows");
  if (classes < 2) throw std::invalid_argument("probe needs at least 2 classes");
  for (int t : targets) {
    if (t < 0 || t >= classes) throw std::invalid_argument("probe target out of range");
  }
  if (std::all_of(targets.begin(), targets.end(), [&](int t) { return t == targets[0]; })) {
    throw std::invalid_argument("probe targets contain a single class");
  }
  if (config.hidden < 1 || config.steps < 0 || !(config.lr >= 0.0)) {
    throw std::invalid_argument("bad probe configuration");
  }

  const Eigen::Index n_train = rows / 2;
  const Eigen::Index n_test = rows - n_train;
  const Matrix train = representations.topRows(n_train);
  const Matrix test = representations.bottomRows(n_test);
  const std::span<const int> y_train = targets.first(static_cast<std::size_t>(n_train));
  const std::span<const int> y_test = targets.subspan(static_cast<std::size_t>(n_train));

  ProbeResult r;
  r.train_rows = static_cast<int>(n_train);
  r.test_rows = static_cast<int>(n_test);
  r.mean = train.colwise().mean();
  const Matrix centered = train.rowwise() - r.mean;
  r.scale = (centered.colwise().squaredNorm() / static_cast<double>(n_train)).cwiseSqrt();
  // Constant columns carry no signal; leave them centered at zero.
  for (Eigen::Index c = 0; c < r.scale.size(); ++c) {
    if (!(r.scale(c) > 1e-12)) r.scale(c) = 1.0;
  }
  auto standardize = [&](const Matrix& m) -> Matrix {
    return (m.rowwise() - r.mean).array().rowwise() / r.scale.array();
  };
  const Matrix x_train = standardize(train);

  nn::Rng rng(config.seed);
  const std::vector<int> widths{static_cast<int>(representations.cols()), config.hidden, classes};
  r.net = nn::Mlp::initialized(widths, rng);
  nn::AdamWConfig opt;
  opt.lr = config.lr;
  auto state = nn::OptimState::for_network(r.net, opt);
  for (int t = 0; t < config.steps; ++t) {
    const auto fwd = nn::forward(r.net, x_train);
    const auto loss = nn::cross_entropy(fwd.output, y_train);
    nn::adamw_step(r.net, nn::backward(r.net, fwd.cache, loss.grad).params, state);
  }
  r.accuracy = nn::accuracy(r.net.predict(standardize(test)), y_test);
  return r;
}

}  // namespace leakchain::eval
