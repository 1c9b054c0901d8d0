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

#ifndef LEAKCHAIN_HARNESS_CONFIG_HPP_
#define LEAKCHAIN_HARNESS_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "leakchain/eval/pipeline_eval.hpp"
#include "leakchain/train/trainer.hpp"

namespace leakchain::harness {

enum class Mode { kVerifyBound, kTrain, kSweep, kProbe, kReport };

// Which agents carry a penalty. Early-only spreads the same total budget
// (sum of betas) over the first max(1, N/2) agents.
enum class Selective { kNone, kEarly, kAll };

std::string to_string(Mode mode);
std::string to_string(Selective selective);
Selective parse_selective(const std::string& text);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat key schema; see README for the full table.
struct RunConfig {
  Mode mode = Mode::kTrain;
  int agents = 2;                          // N
  std::optional<std::vector<double>> betas;  // per agent; unset means uniform `beta`
  double beta = 0.1;
  Selective selective = Selective::kAll;

  int batch = 64;
  int iterations = 2000;
  int critic_steps = 5;
  double eta_theta = 1e-3;
  double eta_psi = 1e-3;
  double clip_norm = 10.0;
  int eval_interval = 0;
  int repr_dim = 16;
  int agent_hidden = 64;
  int agent_hidden_layers = 2;
  int critic_hidden = 256;
  int critic_hidden_layers = 2;
  double ema_rate = 0.99;

  int public_dim = 4;
  int sensitive_classes = 4;
  int label_classes = 2;
  bool sensitive_to_input = true;
  double sensitive_label_weight = 0.0;
  int train_samples = 4096;
  int test_samples = 2048;
  double label_noise = 0.1;

  int probe_hidden = 64;
  int probe_steps = 500;
  double probe_lr = 1e-3;
  double ot_sigma = 0.01;
  std::optional<double> mi_baseline;

  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::string output_dir = "out";

  std::vector<double> sweep_betas;
  std::vector<int> sweep_depths;
  std::vector<Selective> sweep_selective;

  int verify_count = 1000;
  int verify_n_min = 2;
  int verify_n_max = 5;
  int verify_max_alphabet = 4;
  std::uint64_t verify_seed = 0;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  // Throws ConfigError naming the offending key.
  void validate() const;

  // Betas after applying the selective condition.
  std::vector<double> effective_betas() const;
  // Mean of the configured per-agent betas, used as the run's nominal beta.
  double nominal_beta() const;

  train::SyntheticTaskSpec task_spec(std::uint64_t seed) const;
  train::TrainConfig train_config(std::uint64_t seed) const;
  eval::EvalConfig eval_config(std::uint64_t seed) const;
};

// Parses YAML text. Errors carry the line number where available.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
// Canonical YAML form; doubles use 17 significant digits.
std::string serialize_config(const RunConfig& config);

// Git blob hash ("blob <len>\0<content>", SHA-1) as lowercase hex.
std::string git_blob_hash(const std::string& content);

}  // namespace leakchain::harness

#endif  // LEAKCHAIN_HARNESS_CONFIG_HPP_
