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

#ifndef LEAKCHAIN_EVAL_PROBE_HPP_
#define LEAKCHAIN_EVAL_PROBE_HPP_

#include <cstdint>
#include <span>

#include "leakchain/nn/mlp.hpp"

namespace leakchain::eval {

using nn::Matrix;
using nn::RowVector;

struct ProbeConfig {
  int hidden = 64;
  int steps = 500;
  double lr = 1e-3;
  std::uint64_t seed = 0;

  friend bool operator==(const ProbeConfig&, const ProbeConfig&) = default;
};

struct ProbeResult {
  nn::Mlp net;
  RowVector mean;   // standardization fitted on the probe's training rows
  RowVector scale;
  double accuracy = 0.0;  // on held-out rows
  int train_rows = 0;
  int test_rows = 0;
};

// Trains a one-hidden-layer classifier on the first half of the rows
// (full-batch) and reports accuracy on the second half. Representations are
// treated as constants. Throws std::invalid_argument when the targets hold
// a single class or the split is too small.
ProbeResult train_probe(const Matrix& representations, std::span<const int> targets,
                        int classes, const ProbeConfig& config);

}  // namespace leakchain::eval

#endif  // LEAKCHAIN_EVAL_PROBE_HPP_
