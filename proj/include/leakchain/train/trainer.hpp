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

#ifndef LEAKCHAIN_TRAIN_TRAINER_HPP_
#define LEAKCHAIN_TRAIN_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "leakchain/mine/mine.hpp"
#include "leakchain/nn/optim.hpp"
#include "leakchain/train/model.hpp"
#include "leakchain/train/task.hpp"

namespace leakchain::train {

struct TrainConfig {
  std::vector<double> betas;        // one per agent
  std::vector<bool> active;         // selective mask; empty means all active
  double eta_theta = 1e-3;          // agents and head
  double eta_psi = 1e-3;            // critics
  int batch = 64;
  int iterations = 2000;
  int critic_steps = 5;             // per agent per iteration
  double clip_norm = 10.0;          // <= 0 disables clipping
  int eval_interval = 0;            // 0 disables periodic evaluation
  std::uint64_t seed = 0;
  ModelConfig model{};
  mine::CriticConfig critic{};

  bool is_active(int agent) const { return active.empty() || active[agent]; }
  // Throws std::invalid_argument when inconsistent with `agents`.
  void validate(int agents) const;
};

struct TraceRow {
  int iter = 0;
  double utility = 0.0;
  std::vector<double> penalties;  // clamped, every agent
  double total = 0.0;
};

struct MiRow {
  int iter = 0;
  int agent = 0;  // 1-based
  mine::MineEstimate estimate;
};

struct EvalRow {
  int iter = 0;
  double test_ce = 0.0;
  double test_accuracy = 0.0;
};

struct TrainTrace {
  std::vector<TraceRow> rows;
  std::vector<MiRow> mi;
  std::vector<EvalRow> eval;
};

// Everything that evolves during a run, including the random streams.
struct TrainState {
  PipelineModel model;
  std::vector<mine::Critic> critics;
  std::vector<nn::OptimState> agent_optim;
  nn::OptimState head_optim;
  Rng data_rng;
  Rng critic_rng;
  int iteration = 0;

  static TrainState initialize(const SyntheticTask& task, const TrainConfig& config);
};

class TrainingAborted : public std::runtime_error {
 public:
  TrainingAborted(const std::string& what, TrainTrace partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const TrainTrace& partial() const { return partial_; }

 private:
  TrainTrace partial_;
};

// utility + sum over active agents of beta_i * penalty_i.
double total_loss(double utility, std::span<const double> penalties, const TrainConfig& config);

// Phase 1 forward; phase 2 runs K critic ascent steps per agent on this
// batch's representations; phase 3 injects beta_i times the penalty
// gradient at O_i for active agents, clips, and steps every agent and the
// head. Appends per-agent estimates to `mi` when non-null.
TraceRow train_iteration(TrainState& state, const Batch& batch, const TrainConfig& config,
                         std::vector<MiRow>* mi);

struct TrainResult {
  TrainState state;
  TrainTrace trace;
};

using EvalHook = std::function<void(const TrainState&, EvalRow&)>;

// Runs `config.iterations` iterations on minibatches drawn from the train
// split. Throws TrainingAborted on a nonfinite loss or gradient.
TrainResult run_training(const SyntheticTask& task, const TrainConfig& config,
                         const EvalHook& hook = {});

// Test-split cross-entropy and accuracy of the current model.
EvalRow evaluate(const PipelineModel& model, const SyntheticTask& task);

void write_train_trace_csv(std::ostream& os, const TrainTrace& trace, int agents);
void write_mi_trace_csv(std::ostream& os, const TrainTrace& trace);

}  // namespace leakchain::train

#endif  // LEAKCHAIN_TRAIN_TRAINER_HPP_
