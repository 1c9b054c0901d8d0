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

#ifndef LEAKCHAIN_TRAIN_MODEL_HPP_
#define LEAKCHAIN_TRAIN_MODEL_HPP_

#include <istream>
#include <ostream>
#include <vector>

#include "leakchain/nn/mlp.hpp"
#include "leakchain/train/task.hpp"

namespace leakchain::train {

struct ModelConfig {
  int repr_dim = 16;
  int agent_hidden = 64;
  int agent_hidden_layers = 2;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Agent i maps concat(O_{i-1}, D_i, onehot(S_i)) to O_i; O_0 is empty and the
// one-hot block is present only when the task injects S into inputs. A
// linear head maps O_N to label logits.
class PipelineModel {
 public:
  PipelineModel(std::vector<nn::Mlp> agents, nn::Mlp head, bool sensitive_to_input,
                int sensitive_classes);

  static PipelineModel initialized(const SyntheticTaskSpec& task, const ModelConfig& config,
                                   Rng& rng);

  int agents() const { return static_cast<int>(agents_.size()); }
  int repr_dim() const { return head_.input_dim(); }
  bool sensitive_to_input() const { return sensitive_to_input_; }
  int sensitive_classes() const { return sensitive_classes_; }

  const std::vector<nn::Mlp>& agent_nets() const { return agents_; }
  std::vector<nn::Mlp>& agent_nets() { return agents_; }
  const nn::Mlp& head() const { return head_; }
  nn::Mlp& head() { return head_; }

 private:
  std::vector<nn::Mlp> agents_;
  nn::Mlp head_;
  bool sensitive_to_input_ = true;
  int sensitive_classes_ = 2;
};

struct PipelineForward {
  std::vector<Matrix> outputs;  // O_1..O_N
  std::vector<nn::ForwardCache> agent_caches;
  nn::ForwardCache head_cache;
  Matrix logits;
  double utility = 0.0;  // cross-entropy, nats
  Matrix grad_logits;
};

// Agent i's input block for a batch.
Matrix agent_input(const PipelineModel& model, const Batch& batch, int agent,
                   const Matrix* previous);

PipelineForward forward_pipeline(const PipelineModel& model, const Batch& batch);

struct PipelineGradients {
  std::vector<nn::Gradients> agents;
  nn::Gradients head;
};

// Backpropagates the utility gradient through the chain; extra[i], if
// non-empty, is added to dL/dO_i before agent i's backward pass.
PipelineGradients backward_pipeline(const PipelineModel& model, const PipelineForward& fwd,
                                    const std::vector<Matrix>& extra);

// Layout: "leakchain-pipeline 1", "agents <N> sensitive_to_input <0|1>
// sensitive_classes <k>", then N agent networks and the head, each in the
// single-network checkpoint format.
void save_pipeline(std::ostream& os, const PipelineModel& model);
PipelineModel load_pipeline(std::istream& is);

}  // namespace leakchain::train

#endif  // LEAKCHAIN_TRAIN_MODEL_HPP_
