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

#include "leakchain/train/trainer.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>

#include "leakchain/nn/loss.hpp"

namespace leakchain::train {

namespace {

constexpr std::uint64_t kInitStream = 11;
constexpr std::uint64_t kDataStream = 12;
constexpr std::uint64_t kCriticStream = 13;

std::string DescribeRow(const TraceRow& r) {
  std::ostringstream os;
  os << "iter " << r.iter << " utility " << r.utility << " total " << r.total << " penalties";
  for (double p : r.penalties) os << ' ' << p;
  return os.str();
}

}  // namespace

void TrainConfig::validate(int agents) const {
  if (static_cast<int>(betas.size()) != agents) {
    throw std::invalid_argument("expected " + std::to_string(agents) + " betas, got " +
                                std::to_string(betas.size()));
  }
  for (double b : betas) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw std::invalid_argument("betas must be finite and >= 0");
  }
  if (!active.empty() && static_cast<int>(active.size()) != agents) {
    throw std::invalid_argument("selective mask length differs from agent count");
  }
  if (batch < 2) throw std::invalid_argument("batch must be >= 2");
  if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  if (critic_steps < 0) throw std::invalid_argument("critic_steps must be >= 0");
  if (!(eta_theta >= 0.0) || !(eta_psi >= 0.0)) {
    throw std::invalid_argument("learning rates must be >= 0");
  }
  if (eval_interval < 0) throw std::invalid_argument("eval_interval must be >= 0");
}

TrainState TrainState::initialize(const SyntheticTask& task, const TrainConfig& config) {
  config.validate(task.spec().agents);
  Rng init(stream_seed(config.seed, kInitStream));
  PipelineModel model = PipelineModel::initialized(task.spec(), config.model, init);
  nn::AdamWConfig agent_opt;
  agent_opt.lr = config.eta_theta;
  std::vector<nn::OptimState> agent_optim;
  for (const auto& a : model.agent_nets()) {
    agent_optim.push_back(nn::OptimState::for_network(a, agent_opt));
  }
  nn::OptimState head_optim = nn::OptimState::for_network(model.head(), agent_opt);

  // Critics draw from their own stream so that the agent path is identical
  // whether or not any penalty is active.
  Rng critic_init(stream_seed(config.seed, kCriticStream) ^ 0x5bd1e995ULL);
  mine::CriticConfig cc = config.critic;
  cc.optim.lr = config.eta_psi;
  std::vector<mine::Critic> critics;
  for (int i = 0; i < task.spec().agents; ++i) {
    critics.emplace_back(model.repr_dim(), task.spec().sensitive_classes, cc, critic_init);
  }
  return TrainState{std::move(model),
                    std::move(critics),
                    std::move(agent_optim),
                    std::move(head_optim),
                    Rng(stream_seed(config.seed, kDataStream)),
                    Rng(stream_seed(config.seed, kCriticStream)),
                    0};
}

double total_loss(double utility, std::span<const double> penalties, const TrainConfig& config) {
  if (penalties.size() != config.betas.size()) {
    throw std::invalid_argument("penalty count differs from beta count");
  }
  double total = utility;
  for (std::size_t i = 0; i < penalties.size(); ++i) {
    if (config.is_active(static_cast<int>(i)) && config.betas[i] != 0.0) {
      total += config.betas[i] * penalties[i];
    }
  }
  return total;
}

TraceRow train_iteration(TrainState& state, const Batch& batch, const TrainConfig& config,
                         std::vector<MiRow>* mi) {
  const int n = state.model.agents();
  config.validate(n);
  ++state.iteration;

  // Phase 1
  const PipelineForward fwd = forward_pipeline(state.model, batch);
  std::vector<Matrix> s_codes;
  for (int i = 0; i < n; ++i) {
    s_codes.push_back(mine::encode_sensitive(batch.sensitive[i], state.model.sensitive_classes()));
  }

  // Phase 2
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < config.critic_steps; ++k) {
      mine::critic_step(state.critics[i], fwd.outputs[i], s_codes[i], state.critic_rng,
                        config.eta_psi);
    }
  }

  // Phase 3
  TraceRow row;
  row.iter = state.iteration;
  row.utility = fwd.utility;
  std::vector<Matrix> inject(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Matrix shuffled = mine::make_marginal_batch(fwd.outputs[i], s_codes[i], state.critic_rng);
    auto pg = mine::mi_penalty_gradient(state.critics[i], fwd.outputs[i], s_codes[i], shuffled);
    row.penalties.push_back(pg.penalty);
    if (mi) mi->push_back(MiRow{state.iteration, i + 1, pg.estimate});
    const double beta = config.betas[i];
    if (config.is_active(i) && beta != 0.0) inject[i] = beta * pg.grad_o;
  }
  row.total = total_loss(row.utility, row.penalties, config);
  if (!std::isfinite(row.total)) {
    throw nn::TrainingDivergence("nonfinite loss at " + DescribeRow(row));
  }

  PipelineGradients grads = backward_pipeline(state.model, fwd, inject);
  std::vector<nn::Gradients*> all;
  for (auto& g : grads.agents) all.push_back(&g);
  all.push_back(&grads.head);
  if (config.clip_norm > 0.0) {
    const double norm = nn::clip_global_norm(all, config.clip_norm);
    if (!std::isfinite(norm)) {
      throw nn::TrainingDivergence("nonfinite gradient norm at " + DescribeRow(row));
    }
  }
  for (int i = 0; i < n; ++i) {
    state.agent_optim[i].config.lr = config.eta_theta;
    nn::adamw_step(state.model.agent_nets()[i], grads.agents[i], state.agent_optim[i]);
  }
  state.head_optim.config.lr = config.eta_theta;
  nn::adamw_step(state.model.head(), grads.head, state.head_optim);
  return row;
}

EvalRow evaluate(const PipelineModel& model, const SyntheticTask& task) {
  const Batch& test = task.split(Split::kTest);
  const PipelineForward fwd = forward_pipeline(model, test);
  return EvalRow{0, fwd.utility, nn::accuracy(fwd.logits, test.labels)};
}

TrainResult run_training(const SyntheticTask& task, const TrainConfig& config,
                         const EvalHook& hook) {
  TrainResult result{TrainState::initialize(task, config), {}};
  result.trace.rows.reserve(static_cast<std::size_t>(config.iterations));
  for (int t = 0; t < config.iterations; ++t) {
    const Batch batch = task.sample(Split::kTrain, config.batch, result.state.data_rng);
    try {
      result.trace.rows.push_back(
          train_iteration(result.state, batch, config, &result.trace.mi));
    } catch (const std::exception& e) {
      throw TrainingAborted(std::string("training aborted: ") + e.what(),
                            std::move(result.trace));
    }
    const int iter = result.state.iteration;
    if (config.eval_interval > 0 &&
        (iter % config.eval_interval == 0 || iter == config.iterations)) {
      EvalRow row = evaluate(result.state.model, task);
      row.iter = iter;
      if (hook) hook(result.state, row);
      result.trace.eval.push_back(row);
    }
  }
  return result;
}

void write_train_trace_csv(std::ostream& os, const TrainTrace& trace, int agents) {
  os << "iter,utility_nats";
  for (int i = 1; i <= agents; ++i) os << ",penalty_agent_" << i << "_nats";
  os << ",total_nats\n";
  os << std::setprecision(12);
  for (const auto& r : trace.rows) {
    os << r.iter << ',' << r.utility;
    for (double p : r.penalties) os << ',' << p;
    os << ',' << r.total << '\n';
  }
}

void write_mi_trace_csv(std::ostream& os, const TrainTrace& trace) {
  os << "iter,agent,mi_nats,joint_mean,log_partition\n";
  os << std::setprecision(12);
  for (const auto& r : trace.mi) {
    os << r.iter << ',' << r.agent << ',' << r.estimate.value << ',' << r.estimate.joint_mean
       << ',' << r.estimate.log_partition << '\n';
  }
}

}  // namespace leakchain::train
