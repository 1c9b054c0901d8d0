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

#ifndef LEAKCHAIN_NN_MLP_HPP_
#define LEAKCHAIN_NN_MLP_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace leakchain::nn {

// Batch-major dense matrix: one sample per row.
using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;
using Rng = std::mt19937_64;

// y = x * weight + bias, weight is (in x out).
struct Dense {
  Matrix weight;
  RowVector bias;

  int input_dim() const { return static_cast<int>(weight.rows()); }
  int output_dim() const { return static_cast<int>(weight.cols()); }
};

// Feed-forward stack with rectifier on hidden layers and identity output.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<Dense> layers);

  // widths = {in, h1, ..., out}. Layers feeding a rectifier use
  // N(0, 2/fan_in) weights; the output layer uses N(0, 1/fan_in). Biases 0.
  static Mlp initialized(std::span<const int> widths, Rng& rng);

  int input_dim() const { return layers_.front().input_dim(); }
  int output_dim() const { return layers_.back().output_dim(); }
  std::size_t depth() const { return layers_.size(); }
  bool empty() const { return layers_.empty(); }

  const std::vector<Dense>& layers() const { return layers_; }
  std::vector<Dense>& layers() { return layers_; }

  std::size_t parameter_count() const;

  // Forward pass without retaining intermediates.
  Matrix predict(const Matrix& x) const;

 private:
  std::vector<Dense> layers_;
};

// Per-layer inputs and pre-activations retained for backward().
struct ForwardCache {
  std::vector<Matrix> inputs;
  std::vector<Matrix> pre_activations;
};

struct ForwardResult {
  Matrix output;
  ForwardCache cache;
};

// Same layout as Mlp::layers().
struct Gradients {
  std::vector<Dense> layers;

  static Gradients zeros_like(const Mlp& net);
  Gradients& operator+=(const Gradients& other);
  double squared_norm() const;
  bool all_finite() const;
  void scale(double factor);
};

struct BackwardResult {
  Gradients params;
  Matrix input;  // dL/dx
};

ForwardResult forward(const Mlp& net, const Matrix& x);

// Rectifier subgradient at exactly 0 is 0.
BackwardResult backward(const Mlp& net, const ForwardCache& cache, const Matrix& grad_output);

// Rescales all gradients jointly when their global L2 norm exceeds max_norm.
// Returns the norm before clipping.
double clip_global_norm(std::span<Gradients* const> grads, double max_norm);

// Row-wise concatenation of feature blocks with matching batch size.
Matrix concat_columns(std::span<const Matrix* const> blocks);

Matrix one_hot(std::span<const int> labels, int classes);

}  // namespace leakchain::nn

#endif  // LEAKCHAIN_NN_MLP_HPP_
