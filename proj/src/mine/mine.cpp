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

#include "leakchain/mine/mine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace leakchain::mine {

namespace {

void CheckBatch(const Matrix& o, const Matrix& s, int o_dim, int s_dim) {
  if (o.rows() != s.rows()) throw std::invalid_argument("o and s batch sizes differ");
  if (o.cols() != o_dim || s.cols() != s_dim) {
    throw std::invalid_argument("critic expects " + std::to_string(o_dim) + "+" +
                                std::to_string(s_dim) + " input columns, got " +
                                std::to_string(o.cols()) + "+" + std::to_string(s.cols()));
  }
  if (o.rows() < 1) throw std::invalid_argument("empty batch");
}

// Joint rows first, then marginal rows, in one matrix.
Matrix StackedInput(const Matrix& o, const Matrix& s, const Matrix& s_shuffled) {
  Matrix x(2 * o.rows(), o.cols() + s.cols());
  x.topLeftCorner(o.rows(), o.cols()) = o;
  x.topRightCorner(o.rows(), s.cols()) = s;
  x.bottomLeftCorner(o.rows(), o.cols()) = o;
  x.bottomRightCorner(o.rows(), s.cols()) = s_shuffled;
  return x;
}

MineEstimate FromScores(const Eigen::VectorXd& joint, const Eigen::VectorXd& marginal) {
  if (!joint.allFinite() || !marginal.allFinite()) {
    throw std::runtime_error("critic produced a nonfinite score");
  }
  const double shift = marginal.maxCoeff();
  const double lme =
      shift + std::log((marginal.array() - shift).exp().mean());
  MineEstimate e;
  e.joint_mean = joint.mean();
  e.log_partition = lme;
  e.value = e.joint_mean - e.log_partition;
  return e;
}

}  // namespace

Critic::Critic(int o_dim, int s_dim, const CriticConfig& config, Rng& rng)
    : o_dim_(o_dim), s_dim_(s_dim), ema_rate_(config.ema_rate) {
  if (o_dim < 1 || s_dim < 1) throw std::invalid_argument("critic input dims must be >= 1");
  if (config.hidden < 1 || config.hidden_layers < 0) {
    throw std::invalid_argument("bad critic hidden shape");
  }
  if (!(config.ema_rate > 0.0 && config.ema_rate < 1.0)) {
    throw std::invalid_argument("ema rate must lie in (0, 1)");
  }
  std::vector<int> widths{o_dim + s_dim};
  for (int l = 0; l < config.hidden_layers; ++l) widths.push_back(config.hidden);
  widths.push_back(1);
  net_ = nn::Mlp::initialized(widths, rng);
  optim_ = nn::OptimState::for_network(net_, config.optim);
}

Critic::Critic(nn::Mlp net, int o_dim, double ema_rate, const nn::AdamWConfig& optim)
    : net_(std::move(net)), o_dim_(o_dim), ema_rate_(ema_rate) {
  if (net_.empty() || net_.output_dim() != 1) {
    throw std::invalid_argument("critic network must have a scalar output");
  }
  s_dim_ = net_.input_dim() - o_dim;
  if (o_dim < 1 || s_dim_ < 1) throw std::invalid_argument("critic input split is invalid");
  if (!(ema_rate > 0.0 && ema_rate < 1.0)) {
    throw std::invalid_argument("ema rate must lie in (0, 1)");
  }
  optim_ = nn::OptimState::for_network(net_, optim);
}

Matrix Critic::score(const Matrix& o, const Matrix& s) const {
  CheckBatch(o, s, o_dim_, s_dim_);
  Matrix x(o.rows(), o.cols() + s.cols());
  x << o, s;
  return net_.predict(x);
}

Matrix make_marginal_batch(const Matrix& o, const Matrix& s, Rng& rng) {
  if (o.rows() != s.rows()) throw std::invalid_argument("o and s batch sizes differ");
  if (s.rows() < 2) throw std::invalid_argument("marginal resampling needs a batch of at least 2");
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(s.rows()));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  // Fisher-Yates with an explicit draw so the permutation does not depend on
  // the standard library's shuffle implementation.
  for (std::size_t i = perm.size() - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(perm[i], perm[pick(rng)]);
  }
  Matrix out(s.rows(), s.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) out.row(i) = s.row(perm[i]);
  return out;
}

MineEstimate dv_estimate(const Critic& critic, const Matrix& o, const Matrix& s,
                         const Matrix& s_shuffled) {
  CheckBatch(o, s, critic.o_dim(), critic.s_dim());
  CheckBatch(o, s_shuffled, critic.o_dim(), critic.s_dim());
  const Matrix t = critic.net().predict(StackedInput(o, s, s_shuffled));
  const Eigen::Index b = o.rows();
  return FromScores(t.col(0).head(b), t.col(0).tail(b));
}

MineEstimate critic_step(Critic& critic, const Matrix& o, const Matrix& s, Rng& rng, double lr) {
  CheckBatch(o, s, critic.o_dim(), critic.s_dim());
  const Matrix s_shuffled = make_marginal_batch(o, s, rng);
  const Eigen::Index b = o.rows();
  const auto fwd = nn::forward(critic.net_, StackedInput(o, s, s_shuffled));
  const Eigen::VectorXd joint = fwd.output.col(0).head(b);
  const Eigen::VectorXd marginal = fwd.output.col(0).tail(b);
  const MineEstimate before = FromScores(joint, marginal);

  const Eigen::ArrayXd exp_marginal = marginal.array().exp();
  const double batch_mean = exp_marginal.mean();
  if (!std::isfinite(batch_mean)) {
    throw nn::TrainingDivergence("critic marginal scores overflow exp");
  }
  critic.ema_ = critic.ema_ ? critic.ema_rate_ * *critic.ema_ + (1.0 - critic.ema_rate_) * batch_mean
                            : batch_mean;

  // Descend on -DV; the log-partition derivative uses the running mean.
  Matrix grad(2 * b, 1);
  grad.col(0).head(b).setConstant(-1.0 / static_cast<double>(b));
  grad.col(0).tail(b) = (exp_marginal / (static_cast<double>(b) * *critic.ema_)).matrix();
  const auto back = nn::backward(critic.net_, fwd.cache, grad);
  critic.optim_.config.lr = lr;
  nn::adamw_step(critic.net_, back.params, critic.optim_);
  return before;
}

PenaltyGradient mi_penalty_gradient(const Critic& critic, const Matrix& o, const Matrix& s,
                                    const Matrix& s_shuffled) {
  CheckBatch(o, s, critic.o_dim(), critic.s_dim());
  CheckBatch(o, s_shuffled, critic.o_dim(), critic.s_dim());
  const Eigen::Index b = o.rows();
  const auto fwd = nn::forward(critic.net(), StackedInput(o, s, s_shuffled));
  const Eigen::VectorXd joint = fwd.output.col(0).head(b);
  const Eigen::VectorXd marginal = fwd.output.col(0).tail(b);
  const MineEstimate e = FromScores(joint, marginal);

  PenaltyGradient r;
  r.raw = e.value;
  r.estimate = e;
  r.penalty = std::max(0.0, e.value);
  r.grad_o = Matrix::Zero(b, o.cols());
  if (!(e.value > 0.0)) return r;

  // d/dT of the joint mean is 1/B; of the log-mean-exp, the softmax weights.
  const Eigen::ArrayXd w = (marginal.array() - e.log_partition).exp() / static_cast<double>(b);
  Matrix grad(2 * b, 1);
  grad.col(0).head(b).setConstant(1.0 / static_cast<double>(b));
  grad.col(0).tail(b) = (-w).matrix();
  const Matrix dx = nn::backward(critic.net(), fwd.cache, grad).input;
  r.grad_o = dx.topLeftCorner(b, o.cols()) + dx.bottomLeftCorner(b, o.cols());
  return r;
}

Matrix encode_sensitive(std::span<const int> values, int classes) {
  return nn::one_hot(values, classes);
}

FitResult fit_and_estimate(const Sampler& sample, int o_dim, int s_dim,
                           const CriticConfig& config, int batch, int steps,
                           int eval_samples, std::uint64_t seed) {
  Rng init_rng(seed);
  Rng data_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  Critic critic(o_dim, s_dim, config, init_rng);
  FitResult result;
  result.train_trace.reserve(static_cast<std::size_t>(steps));
  for (int t = 0; t < steps; ++t) {
    const SampleBatch xb = sample(batch, data_rng);
    result.train_trace.push_back(critic_step(critic, xb.o, xb.s, init_rng, config.optim.lr).value);
  }
  const SampleBatch held = sample(eval_samples, data_rng);
  const Matrix shuffled = make_marginal_batch(held.o, held.s, data_rng);
  result.held_out = dv_estimate(critic, held.o, held.s, shuffled);
  return result;
}

}  // namespace leakchain::mine
