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

#ifndef LEAKCHAIN_HARNESS_RUN_HPP_
#define LEAKCHAIN_HARNESS_RUN_HPP_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "leakchain/eval/metrics.hpp"
#include "leakchain/harness/config.hpp"

namespace leakchain::harness {

namespace fs = std::filesystem;

// LEAKCHAIN_OUT when set, otherwise config.output_dir.
fs::path output_root(const RunConfig& config);

// Config describing exactly one training run. The output location and the
// sweep and verify keys are reset so they do not affect the run id.
RunConfig single_run_config(const RunConfig& base, int agents, double beta, Selective selective,
                            std::uint64_t seed);

// First 12 hex digits of the git blob hash of the serialized config.
std::string run_id(const RunConfig& single);

// One probe measurement: observer O_i against target S_j (1-based, j <= i).
struct ProbeRow {
  int observer = 0;
  int target = 0;
  double accuracy = 0.0;
  double margin = 0.0;
};

void write_probe_csv(std::ostream& os, const std::vector<ProbeRow>& rows);
std::vector<ProbeRow> read_probe_csv(std::istream& is);

// Mean over observers of the summed margins for targets j <= i.
double depth_leakage(const std::vector<ProbeRow>& rows);
// Summed margins of the last observer.
double global_leakage(const std::vector<ProbeRow>& rows);
// Mean accuracy of probes with observer == target.
double local_leakage(const std::vector<ProbeRow>& rows);

// What a finished run directory holds, independent of how it was produced.
struct RunSummary {
  std::string run_id;
  fs::path dir;
  RunConfig config;  // from config_snapshot.yaml
  eval::MetricsRecord metrics;
  std::vector<ProbeRow> probes;
  bool reused = false;
};

// Throws std::runtime_error naming the missing or corrupt file.
RunSummary load_run_summary(const fs::path& dir);

// "baseline" when no agent carries a penalty, "early" for early-only
// selective runs, "regularized" otherwise.
std::string arm_of(const RunConfig& single);

// Trains, evaluates and writes runs/<id>/ under root. Reuses an existing
// directory whose snapshot matches. PI uses `paired_baseline` when given,
// then config.mi_baseline, then the run's own value for unpenalized runs,
// and otherwise trains the paired unpenalized run.
RunSummary execute_run(const RunConfig& single, const fs::path& root,
                       std::optional<double> paired_baseline = std::nullopt,
                       bool reuse = true);

// Re-evaluates a stored run from its checkpoints and rewrites probe.csv.
RunSummary reprobe_run(const fs::path& dir);

}  // namespace leakchain::harness

#endif  // LEAKCHAIN_HARNESS_RUN_HPP_
