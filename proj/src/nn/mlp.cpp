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

#include "leakchain/nn/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace leakchain::nn {

namespace {

std::string Shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Mlp::Mlp(std::vector<Dense> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("network needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& d = layers_[l];
    if (d.bias.size() != d.weight.cols()) {
      throw std::invalid_argument("layer " + std::to_string(l) + " bias width mismatch");
    }
    if (l > 0 && layers_[l - 1].output_dim() != d.input_dim()) {
      throw std::invalid_argument("layer " + std::to_string(l) + " does not chain");
    }
    if (!d.weight.allFinite() || !d.bias.allFinite()) {
      throw std::invalid_argument("layer " + std::to_string(l) + " has nonfinite parameters");
    }
  }
}

Mlp Mlp::initialized(std::span<const int> widths, Rng& rng) {
  if (widths.size() < 2) throw std::invalid_argument("need input and output widths");
  std::vector<Dense> layers;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int in = widths[l], out = widths[l + 1];
    if (in < 1 || out < 1) throw std::invalid_argument("layer widths must be >= 1");
    const bool feeds_rectifier = l + 2 < widths.size();
    const double std = std::sqrt((feeds_rectifier ? 2.0 : 1.0) / in);
    Dense d{Matrix(in, out), RowVector::Zero(out)};
    for (int r = 0; r < in; ++r) {
      for (int c = 0; c < out; ++c) d.weight(r, c) = std * gauss(rng);
    }
    layers.push_back(std::move(d));
  }
  return Mlp(std::move(layers));
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& d : layers_) n += d.weight.size() + d.bias.size();
  return n;
}

Matrix Mlp::predict(const Matrix& x) const {
  if (x.cols() != input_dim()) {
    throw std::invalid_argument("input " + Shape(x) + " does not match network input " +
                                std::to_string(input_dim()));
  }
  Matrix h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix z = h * layers_[l].weight;
    z.rowwise() += layers_[l].bias;
    if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
    h = std::move(z);
  }
  return h;
}

Gradients Gradients::zeros_like(const Mlp& net) {
  Gradients g;
  for (const auto& d : net.layers()) {
    g.layers.push_back({Matrix::Zero(d.weight.rows(), d.weight.cols()),
                        RowVector::Zero(d.bias.size())});
  }
  return g;
}

Gradients& Gradients::operator+=(const Gradients& other) {
  if (other.layers.size() != layers.size()) {
    throw std::invalid_argument("gradient layouts differ");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].weight += other.layers[l].weight;
    layers[l].bias += other.layers[l].bias;
  }
  return *this;
}

double Gradients::squared_norm() const {
  double s = 0.0;
  for (const auto& d : layers) s += d.weight.squaredNorm() + d.bias.squaredNorm();
  return s;
}

bool Gradients::all_finite() const {
  for (const auto& d : layers) {
    if (!d.weight.allFinite() || !d.bias.allFinite()) return false;
  }
  return true;
}

void Gradients::scale(double factor) {
  for (auto& d : layers) {
    d.weight *= factor;
    d.bias *= factor;
  }
}

ForwardResult forward(const Mlp& net, const Matrix& x) {
  if (x.cols() != net.input_dim()) {
    throw std::invalid_argument("input " + Shape(x) + " does not match network input " +
                                std::to_string(net.input_dim()));
  }
  ForwardResult r;
  const auto& layers = net.layers();
  r.cache.inputs.reserve(layers.size());
  r.cache.pre_activations.reserve(layers.size());
  Matrix h = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix z = h * layers[l].weight;
    z.rowwise() += layers[l].bias;
    r.cache.inputs.push_back(std::move(h));
    h = l + 1 < layers.size() ? Matrix(z.cwiseMax(0.0)) : z;
    r.cache.pre_activations.push_back(std::move(z));
  }
  r.output = std::move(h);
  return r;
}

BackwardResult backward(const Mlp& net, const ForwardCache& cache,
                        const Matrix& grad_output) {
  const auto& layers = net.layers();
  if (cache.inputs.size() != layers.size() ||
      cache.pre_activations.size() != layers.size()) {
    throw std::invalid_argument("forward cache does not belong to this network");
  }
  const auto& last = cache.pre_activations.back();
  if (grad_output.rows() != last.rows() || grad_output.cols() != last.cols()) {
    throw std::invalid_argument("output gradient " + Shape(grad_output) +
                                " does not match output " + Shape(last));
  }
  BackwardResult r;
  r.params.layers.resize(layers.size());
  Matrix delta = grad_output;
  for (std::size_t l = layers.size(); l-- > 0;) {
    if (l + 1 < layers.size()) {
      delta = delta.cwiseProduct(
          (cache.pre_activations[l].array() > 0.0).cast<double>().matrix());
    }
    r.params.layers[l].weight = cache.inputs[l].transpose() * delta;
    r.params.layers[l].bias = delta.colwise().sum();
    delta = delta * layers[l].weight.transpose();
  }
  r.input = std::move(delta);
  return r;
}

double clip_global_norm(std::span<Gradients* const> grads, double max_norm) {
  double sq = 0.0;
  for (const auto* g : grads) sq += g->squared_norm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    for (auto* g : grads) g->scale(factor);
  }
  return norm;
}

Matrix concat_columns(std::span<const Matrix* const> blocks) {
  if (blocks.empty()) return Matrix();
  const Eigen::Index rows = blocks.front()->rows();
  Eigen::Index cols = 0;
  for (const auto* b : blocks) {
    if (b->rows() != rows) throw std::invalid_argument("feature blocks differ in batch size");
    cols += b->cols();
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const auto* b : blocks) {
    out.middleCols(at, b->cols()) = *b;
    at += b->cols();
  }
  return out;
}

Matrix one_hot(std::span<const int> labels, int classes) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) {
      throw std::out_of_range("label " + std::to_string(labels[i]) + " outside [0, " +
                              std::to_string(classes) + ")");
    }
    out(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return out;
}

}  // namespace leakchain::nn
