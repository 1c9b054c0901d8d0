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

#include "leakchain/eval/pipeline_eval.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "leakchain/nn/loss.hpp"
#include "leakchain/train/task.hpp"

namespace leakchain::eval {

namespace {

constexpr std::uint64_t kProbeStream = 21;
constexpr std::uint64_t kShuffleStream = 22;
constexpr std::uint64_t kStabilityStream = 23;

Matrix UnitRows(const Matrix& m) {
  Matrix out = m;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double norm = out.row(r).norm();
    if (norm > 0.0) out.row(r) /= norm;
  }
  return out;
}

}  // namespace

double leakage_margin(double accuracy, int classes) {
  if (classes < 2) throw std::invalid_argument("need at least 2 classes");
  const double chance = 1.0 / classes;
  return std::max(0.0, (accuracy - chance) / (1.0 - chance));
}

double output_stability(const train::PipelineModel& model, const train::Batch& batch,
                        double sigma, nn::Rng& rng) {
  if (batch.size() < 1) throw std::invalid_argument("empty batch");
  train::Batch noisy = batch;
  std::normal_distribution<double> g(0.0, 1.0);
  for (auto& d : noisy.public_inputs) {
    d += Matrix::NullaryExpr(d.rows(), d.cols(), [&] { return sigma * g(rng); });
  }
  const Matrix a = UnitRows(train::forward_pipeline(model, batch).outputs.back());
  const Matrix b = UnitRows(train::forward_pipeline(model, noisy).outputs.back());
  const double mean_dist = (a - b).rowwise().norm().mean();
  return std::clamp(1.0 - mean_dist, 0.0, 1.0);
}

PipelineEvaluation evaluate_pipeline(const train::PipelineModel& model,
                                     const std::vector<mine::Critic>& critics,
                                     const train::SyntheticTask& task, const EvalConfig& config) {
  const auto& spec = task.spec();
  const train::Batch& test = task.split(train::Split::kTest);
  const auto fwd = train::forward_pipeline(model, test);
  const int n = model.agents();
  const int ks = spec.sensitive_classes;

  PipelineEvaluation e;
  e.ce = fwd.utility;
  e.predictions = nn::argmax_rows(fwd.logits);
  e.bs = nn::accuracy(fwd.logits, test.labels);

  ProbeConfig pc = config.probe;
  std::uint64_t probe_index = 0;
  auto probe = [&](const Matrix& reps, const std::vector<int>& targets) {
    pc.seed = train::stream_seed(config.seed, kProbeStream + 100 * probe_index++);
    return train_probe(reps, targets, ks, pc).accuracy;
  };
  for (int i = 0; i < n; ++i) e.local_probe.push_back(probe(fwd.outputs[i], test.sensitive[i]));
  e.la = std::accumulate(e.local_probe.begin(), e.local_probe.end(), 0.0) / n;
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    e.probe_accuracy.emplace_back();
    for (int j = 0; j <= i; ++j) {
      const double acc = j == i ? e.local_probe[i] : probe(fwd.outputs[i], test.sensitive[j]);
      e.probe_accuracy.back().push_back(acc);
      sum += leakage_margin(acc, ks);
      if (i == n - 1) e.global_probe.push_back(acc);
    }
    e.cumulative.push_back(sum);
  }
  e.global_leakage = e.cumulative.back();
  e.depth_leakage = std::accumulate(e.cumulative.begin(), e.cumulative.end(), 0.0) / n;

  if (!critics.empty()) {
    if (static_cast<int>(critics.size()) != n) {
      throw std::invalid_argument("need one critic per agent");
    }
    nn::Rng shuffle_rng(train::stream_seed(config.seed, kShuffleStream));
    for (int i = 0; i < n; ++i) {
      const Matrix s = mine::encode_sensitive(test.sensitive[i], ks);
      const Matrix sh = mine::make_marginal_batch(fwd.outputs[i], s, shuffle_rng);
      e.mi.push_back(std::max(0.0, mine::dv_estimate(critics[i], fwd.outputs[i], s, sh).value));
    }
    e.mi_avg = std::accumulate(e.mi.begin(), e.mi.end(), 0.0) / n;
  }

  nn::Rng ot_rng(train::stream_seed(config.seed, kStabilityStream));
  e.ot = output_stability(model, test, config.ot_sigma, ot_rng);
  return e;
}

}  // namespace leakchain::eval
