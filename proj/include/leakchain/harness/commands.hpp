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

#ifndef LEAKCHAIN_HARNESS_COMMANDS_HPP_
#define LEAKCHAIN_HARNESS_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <iterator>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "leakchain/harness/config.hpp"
#include "leakchain/harness/run.hpp"

namespace leakchain::harness {

// ---- verify-bound ----

struct VerifyOptions {
  int count = 1000;
  int n_min = 2;
  int n_max = 5;
  int max_alphabet = 4;
  std::uint64_t seed = 0;
};

struct VerifySummaryRow {
  int agents = 0;
  int checked = 0;
  int passed = 0;
  int violations = 0;
  int capacity_skipped = 0;
  double max_ratio = 0.0;
  double min_slack = 0.0;
  double max_identity_residual = 0.0;
};

// Fuzzes `count` pipelines per N plus the XOR witness. Writes
// bound_checks.csv, bound_summary.csv and xor_witness.csv into out_dir and a
// human summary to `log`. Returns 0 iff nothing was violated.
int cmd_verify_bound(const VerifyOptions& options, const fs::path& out_dir, std::ostream& log,
                     std::vector<VerifySummaryRow>* summary = nullptr);

// ---- report ----

// Column order of the aggregated metrics.
inline constexpr const char* kAggregateFields[] = {
    "ce_nats", "bs", "la", "sb", "bo", "os", "mi_avg_nats", "pi",
    "ot", "rc", "rt", "pari", "depth_leakage", "global_leakage"};
inline constexpr std::size_t kAggregateFieldCount = std::size(kAggregateFields);

struct AggregateRow {
  std::string arm;
  int agents = 0;
  double beta = 0.0;
  int runs = 0;
  std::vector<double> mean;    // kAggregateFields order
  std::vector<double> stddev;  // sample deviation, 0 for a single run

  double mean_of(const std::string& field) const;
};

struct CorrelationRow {
  std::string arm;  // "all" pools every run
  int runs = 0;
  double pearson = 0.0;  // MI_avg against SB; NaN when undefined
};

struct Report {
  std::vector<RunSummary> runs;
  std::vector<AggregateRow> summary;  // sorted by arm, N, beta
  std::vector<CorrelationRow> correlation;
  std::vector<std::pair<std::string, std::string>> errors;  // path, message
};

double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Loads each directory; unreadable ones are listed in Report::errors.
// Throws std::invalid_argument when no run could be loaded.
Report build_report(const std::vector<fs::path>& run_dirs);
Report build_report(std::vector<RunSummary> runs);

// summary.csv, correlation.csv, mi_vs_depth.csv, sb_vs_mi.csv,
// beta_tradeoff.csv and errors.csv.
void write_report(const Report& report, const fs::path& out_dir);

// Directories matched by a shell glob. A match naming a file inside a run
// directory (such as metrics.csv) resolves to that directory.
std::vector<fs::path> glob_run_dirs(const std::string& pattern);

int cmd_report(const std::string& pattern, const fs::path& out_dir, std::ostream& log);

// ---- train / sweep / probe ----

int cmd_train(const RunConfig& config, std::ostream& log);

struct SweepFailure {
  std::string run_id;
  int agents = 0;
  double beta = 0.0;
  Selective selective = Selective::kAll;
  std::uint64_t seed = 0;
  std::string error;
};

struct SweepResult {
  fs::path report_dir;
  std::vector<RunSummary> runs;
  std::vector<SweepFailure> failures;
};

// The grid point configs of a sweep, unpenalized points collapsed onto one
// canonical baseline per (N, seed).
std::vector<RunConfig> sweep_grid(const RunConfig& config);

// Runs baselines first, then penalized points with their paired baseline.
// `jobs` bounds the worker pool.
SweepResult run_sweep(const RunConfig& config, int jobs, std::ostream& log);
int cmd_sweep(const RunConfig& config, int jobs, std::ostream& log);

int cmd_probe(const fs::path& run_dir, std::ostream& log);

}  // namespace leakchain::harness

#endif  // LEAKCHAIN_HARNESS_COMMANDS_HPP_
