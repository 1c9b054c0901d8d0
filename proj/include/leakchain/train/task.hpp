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

#ifndef LEAKCHAIN_TRAIN_TASK_HPP_
#define LEAKCHAIN_TRAIN_TASK_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "leakchain/nn/mlp.hpp"

namespace leakchain::train {

using nn::Matrix;
using nn::Rng;

// Independent seed for a named stream derived from a run seed.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

struct SyntheticTaskSpec {
  int agents = 3;
  int public_dim = 4;
  int sensitive_classes = 4;
  int label_classes = 2;
  bool sensitive_to_input = true;
  double sensitive_label_weight = 0.0;
  int train_samples = 4096;
  int test_samples = 2048;
  double label_noise = 0.1;  // std of Gaussian noise on label scores
  std::uint64_t seed = 0;

  // Throws std::invalid_argument on a bad field.
  void validate() const;
  friend bool operator==(const SyntheticTaskSpec&, const SyntheticTaskSpec&) = default;
};

// Column-aligned samples: public_inputs[i] and sensitive[i] belong to agent i.
struct Batch {
  std::vector<Matrix> public_inputs;
  std::vector<std::vector<int>> sensitive;
  std::vector<int> labels;

  int size() const { return static_cast<int>(labels.size()); }
  Batch rows(std::span<const int> index) const;
};

enum class Split { kTrain, kTest };

// S_i uniform and mutually independent; D_i standard normal. Labels are the
// argmax of a fixed random linear score on concat(D_1..D_N) plus noise, and
// with probability sensitive_label_weight are replaced by S_1 mod k_y.
class SyntheticTask {
 public:
  explicit SyntheticTask(const SyntheticTaskSpec& spec);

  const SyntheticTaskSpec& spec() const { return spec_; }
  const Matrix& label_rule() const { return rule_; }

  // Fresh samples from the generative process.
  Batch gen_batch(int count, Rng& rng) const;

  // Fixed splits, drawn once from seed-derived streams.
  const Batch& split(Split which) const { return which == Split::kTrain ? train_ : test_; }

  // Uniform draw with replacement from a fixed split.
  Batch sample(Split which, int count, Rng& rng) const;

 private:
  SyntheticTaskSpec spec_;
  Matrix rule_;
  Batch train_;
  Batch test_;
};

}  // namespace leakchain::train

#endif  // LEAKCHAIN_TRAIN_TASK_HPP_
