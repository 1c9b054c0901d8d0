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

#include "leakchain/train/model.hpp"

#include <stdexcept>
#include <string>

#include "leakchain/nn/checkpoint.hpp"
#include "leakchain/nn/loss.hpp"

namespace leakchain::train {

namespace {

int PublicDim(const PipelineModel& m, int agent) {
  const int prev = agent == 0 ? 0 : m.repr_dim();
  const int sens = m.sensitive_to_input() ? m.sensitive_classes() : 0;
  return m.agent_nets()[agent].input_dim() - prev - sens;
}

}  // namespace

PipelineModel::PipelineModel(std::vector<nn::Mlp> agents, nn::Mlp head,
                             bool sensitive_to_input, int sensitive_classes)
    : agents_(std::move(agents)),
      head_(std::move(head)),
      sensitive_to_input_(sensitive_to_input),
      sensitive_classes_(sensitive_classes) {
  if (agents_.empty()) throw std::invalid_argument("pipeline needs at least one agent");
  if (head_.empty()) throw std::invalid_argument("pipeline needs a head");
  if (sensitive_classes_ < 2) throw std::invalid_argument("sensitive_classes must be >= 2");
  const int d = head_.input_dim();
  for (int i = 0; i < this->agents(); ++i) {
    if (agents_[i].output_dim() != d) {
      throw std::invalid_argument("agent " + std::to_string(i + 1) +
                                  " output width differs from the head input");
    }
    if (PublicDim(*this, i) < 1) {
      throw std::invalid_argument("agent " + std::to_string(i + 1) + " input width too small");
    }
  }
}

PipelineModel PipelineModel::initialized(const SyntheticTaskSpec& task,
                                         const ModelConfig& config, Rng& rng) {
  task.validate();
  if (config.repr_dim < 1 || config.agent_hidden < 1 || config.agent_hidden_layers < 0) {
    throw std::invalid_argument("bad model shape");
  }
  std::vector<nn::Mlp> agents;
  const int sens = task.sensitive_to_input ? task.sensitive_classes : 0;
  for (int i = 0; i < task.agents; ++i) {
    std::vector<int> widths{(i == 0 ? 0 : config.repr_dim) + task.public_dim + sens};
    for (int l = 0; l < config.agent_hidden_layers; ++l) widths.push_back(config.agent_hidden);
    widths.push_back(config.repr_dim);
    agents.push_back(nn::Mlp::initialized(widths, rng));
  }
  const std::vector<int> head_widths{config.repr_dim, task.label_classes};
  nn::Mlp head = nn::Mlp::initialized(head_widths, rng);
  return PipelineModel(std::move(agents), std::move(head), task.sensitive_to_input,
                       task.sensitive_classes);
}

Matrix agent_input(const PipelineModel& model, const Batch& batch, int agent,
                   const Matrix* previous) {
  if (static_cast<int>(batch.public_inputs.size()) != model.agents() ||
      static_cast<int>(batch.sensitive.size()) != model.agents()) {
    throw std::invalid_argument("batch has " + std::to_string(batch.public_inputs.size()) +
                                " stages, model has " + std::to_string(model.agents()));
  }
  const Matrix& d = batch.public_inputs[agent];
  if (d.cols() != PublicDim(model, agent) || d.rows() != batch.size()) {
    throw std::invalid_argument("public features for agent " + std::to_string(agent + 1) +
                                " have the wrong shape");
  }
  std::vector<const Matrix*> blocks;
  if (agent > 0) blocks.push_back(previous);
  blocks.push_back(&d);
  Matrix onehot;
  if (model.sensitive_to_input()) {
    onehot = nn::one_hot(batch.sensitive[agent], model.sensitive_classes());
    blocks.push_back(&onehot);
  }
  return nn::concat_columns(blocks);
}

PipelineForward forward_pipeline(const PipelineModel& model, const Batch& batch) {
  PipelineForward out;
  const Matrix* prev = nullptr;
  for (int i = 0; i < model.agents(); ++i) {
    auto r = nn::forward(model.agent_nets()[i], agent_input(model, batch, i, prev));
    out.outputs.push_back(std::move(r.output));
    out.agent_caches.push_back(std::move(r.cache));
    prev = &out.outputs.back();
  }
  auto head = nn::forward(model.head(), out.outputs.back());
  out.logits = std::move(head.output);
  out.head_cache = std::move(head.cache);
  auto loss = nn::cross_entropy(out.logits, batch.labels);
  out.utility = loss.loss;
  out.grad_logits = std::move(loss.grad);
  return out;
}

PipelineGradients backward_pipeline(const PipelineModel& model, const PipelineForward& fwd,
                                    const std::vector<Matrix>& extra) {
  const int n = model.agents();
  if (!extra.empty() && static_cast<int>(extra.size()) != n) {
    throw std::invalid_argument("need one injected gradient slot per agent");
  }
  PipelineGradients g;
  g.agents.resize(static_cast<std::size_t>(n));
  auto head = nn::backward(model.head(), fwd.head_cache, fwd.grad_logits);
  g.head = std::move(head.params);
  Matrix grad_o = std::move(head.input);
  for (int i = n - 1; i >= 0; --i) {
    if (!extra.empty() && extra[i].size() > 0) grad_o += extra[i];
    auto r = nn::backward(model.agent_nets()[i], fwd.agent_caches[i], grad_o);
    g.agents[i] = std::move(r.params);
    if (i > 0) grad_o = r.input.leftCols(model.repr_dim());
  }
  return g;
}

void save_pipeline(std::ostream& os, const PipelineModel& model) {
  os << "leakchain-pipeline 1\n";
  os << "agents " << model.agents() << " sensitive_to_input "
     << (model.sensitive_to_input() ? 1 : 0) << " sensitive_classes "
     << model.sensitive_classes() << '\n';
  for (const auto& a : model.agent_nets()) nn::save_mlp(os, a);
  nn::save_mlp(os, model.head());
}

PipelineModel load_pipeline(std::istream& is) {
  std::string magic, k1, k2, k3;
  int version = 0, n = 0, sti = 0, ks = 0;
  if (!(is >> magic >> version) || magic != "leakchain-pipeline" || version != 1) {
    throw nn::CheckpointError("pipeline checkpoint: bad header");
  }
  if (!(is >> k1 >> n >> k2 >> sti >> k3 >> ks) || k1 != "agents" ||
      k2 != "sensitive_to_input" || k3 != "sensitive_classes" || n < 1) {
    throw nn::CheckpointError("pipeline checkpoint: bad shape line");
  }
  std::vector<nn::Mlp> agents;
  for (int i = 0; i < n; ++i) agents.push_back(nn::load_mlp(is));
  nn::Mlp head = nn::load_mlp(is);
  try {
    return PipelineModel(std::move(agents), std::move(head), sti != 0, ks);
  } catch (const std::invalid_argument& e) {
    throw nn::CheckpointError(std::string("pipeline checkpoint: ") + e.what());
  }
}

}  // namespace leakchain::train
