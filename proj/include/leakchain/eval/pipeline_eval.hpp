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

#ifndef LEAKCHAIN_EVAL_PIPELINE_EVAL_HPP_
#define LEAKCHAIN_EVAL_PIPELINE_EVAL_HPP_

#include <cstdint>
#include <vector>

#include "leakchain/eval/probe.hpp"
#include "leakchain/mine/mine.hpp"
#include "leakchain/train/model.hpp"
#include "leakchain/train/task.hpp"

namespace leakchain::eval {

struct EvalConfig {
  ProbeConfig probe{};
  double ot_sigma = 0.01;
  std::uint64_t seed = 0;
};

// Everything measured on the test split of a trained pipeline.
struct PipelineEvaluation {
  double ce = 0.0;
  double bs = 0.0;                     // test accuracy
  std::vector<int> predictions;
  std::vector<double> local_probe;     // probe(O_i -> S_i) accuracy
  double la = 0.0;                     // mean of local_probe
  std::vector<double> global_probe;    // probe(O_N -> S_j) accuracy
  double global_leakage = 0.0;         // sum_j of normalized above-chance margin
  // cumulative[i] = sum_{j<=i} margin of probe(O_i -> S_j); depth_leakage is
  // its mean over agents.
  std::vector<double> cumulative;
  std::vector<std::vector<double>> probe_accuracy;  // [i][j] for j <= i
  double depth_leakage = 0.0;
  std::vector<double> mi;              // frozen critic estimate per agent, clamped at 0
  double mi_avg = 0.0;
  double ot = 0.0;
};

// Normalized above-chance margin: (acc - 1/k) / (1 - 1/k), clamped at 0.
double leakage_margin(double accuracy, int classes);

// Output stability: 1 - mean ||u(q) - u(q + e)|| where u is the unit-normalized
// final representation and e ~ N(0, sigma^2) perturbs public features.
double output_stability(const train::PipelineModel& model, const train::Batch& batch,
                        double sigma, nn::Rng& rng);

// critics may be empty, in which case mi and mi_avg stay 0.
PipelineEvaluation evaluate_pipeline(const train::PipelineModel& model,
                                     const std::vector<mine::Critic>& critics,
                                     const train::SyntheticTask& task, const EvalConfig& config);

}  // namespace leakchain::eval

#endif  // LEAKCHAIN_EVAL_PIPELINE_EVAL_HPP_
