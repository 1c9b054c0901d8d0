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

#ifndef LEAKCHAIN_MINE_MINE_HPP_
#define LEAKCHAIN_MINE_MINE_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "leakchain/nn/mlp.hpp"
#include "leakchain/nn/optim.hpp"

namespace leakchain::mine {

using nn::Matrix;
using nn::Rng;

struct CriticConfig {
  int hidden = 256;
  int hidden_layers = 2;
  double ema_rate = 0.99;
  nn::AdamWConfig optim{};
};

struct MineEstimate {
  double value = 0.0;  // nats
  double joint_mean = 0.0;
  double log_partition = 0.0;
};

// Statistics network T(o, s) -> scalar, plus the running mean of exp(T) on
// marginal pairs used to debias the log-partition gradient.
class Critic {
 public:
  Critic(int o_dim, int s_dim, const CriticConfig& config, Rng& rng);
  // Wraps an existing network whose input is concat(o, s) and output is 1.
  Critic(nn::Mlp net, int o_dim, double ema_rate, const nn::AdamWConfig& optim = {});

  int o_dim() const { return o_dim_; }
  int s_dim() const { return s_dim_; }
  double ema_rate() const { return ema_rate_; }
  const std::optional<double>& ema() const { return ema_; }

  const nn::Mlp& net() const { return net_; }
  nn::Mlp& net() { return net_; }
  const nn::OptimState& optim() const { return optim_; }

  // Scores for rows of concat(o, s); returns a (B x 1) column.
  Matrix score(const Matrix& o, const Matrix& s) const;

 private:
  friend MineEstimate critic_step(Critic&, const Matrix&, const Matrix&, Rng&, double);

  nn::Mlp net_;
  int o_dim_ = 0;
  int s_dim_ = 0;
  double ema_rate_ = 0.99;
  std::optional<double> ema_;
  nn::OptimState optim_;
};

// Uniform random permutation of the rows of s (fixed points allowed).
Matrix make_marginal_batch(const Matrix& o, const Matrix& s, Rng& rng);

// mean T(o, s) - log mean exp T(o, s'), with a max-shifted log-mean-exp.
MineEstimate dv_estimate(const Critic& critic, const Matrix& o, const Matrix& s,
                         const Matrix& s_shuffled);

// One ascent step on the bound using the EMA-corrected gradient. Draws its
// own marginal batch from rng. Returns the estimate before the update.
MineEstimate critic_step(Critic& critic, const Matrix& o, const Matrix& s, Rng& rng, double lr);

struct PenaltyGradient {
  double penalty = 0.0;  // max(0, raw)
  double raw = 0.0;      // estimate.value
  MineEstimate estimate;
  Matrix grad_o;         // d penalty / d o, zero when raw <= 0
};

// Critic held fixed; gradient flows through o in both the joint and the
// shuffled terms.
PenaltyGradient mi_penalty_gradient(const Critic& critic, const Matrix& o, const Matrix& s,
                                    const Matrix& s_shuffled);

// Sensitive values as critic input: one-hot for discrete alphabets.
Matrix encode_sensitive(std::span<const int> values, int classes);

// Trains a fresh critic for `steps` iterations on minibatches drawn by
// `sample` and evaluates it on a separate held-out sample.
struct SampleBatch {
  Matrix o;
  Matrix s;
};
using Sampler = std::function<SampleBatch(int batch, Rng& rng)>;

struct FitResult {
  MineEstimate held_out;
  std::vector<double> train_trace;  // pre-step estimate per iteration
};

FitResult fit_and_estimate(const Sampler& sample, int o_dim, int s_dim,
                           const CriticConfig& config, int batch, int steps,
                           int eval_samples, std::uint64_t seed);

}  // namespace leakchain::mine

#endif  // LEAKCHAIN_MINE_MINE_HPP_
