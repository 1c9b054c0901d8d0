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

#ifndef LEAKCHAIN_EVAL_METRICS_HPP_
#define LEAKCHAIN_EVAL_METRICS_HPP_

#include <cstdint>
#include <optional>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace leakchain::eval {

struct PariWeights {
  double rc = 0.3;
  double ot = 0.1;
  double pi = 0.5;
  double rt = 0.1;  // defaults sum to 1

  // Throws std::invalid_argument on a negative or nonfinite weight.
  void validate() const;
};

double pari(double rc, double ot, double pi, double rt, const PariWeights& weights = {});

// 1 - mi_avg / mi_baseline clamped to [0, 1]; 0 without a positive baseline.
double privacy_integrity(double mi_avg, std::optional<double> mi_baseline);

// Arithmetic mean; throws on an empty list or a negative value.
double mi_avg(std::span<const double> per_agent);

struct CoreMetrics {
  double bs = 0.0;  // benign success
  double la = 0.0;  // leakage accuracy
  double sb = 0.0;  // 1 - la
  double bo = 0.0;  // (bs + sb) / 2
  double os = 0.0;
};

// bs from predictions vs labels; la from the probe. os is bs * sb unless
// per-instance leak indicators are given, in which case it is the fraction
// of rows both correct and not leaked.
CoreMetrics core_metrics(std::span<const int> predictions, std::span<const int> labels,
                         double leakage_accuracy,
                         std::optional<std::span<const bool>> leaked = std::nullopt);

// Formula adapter for externally scored agent trajectories: la := lrh,
// sb := 1 - lrh, os := bs * sb.
CoreMetrics privacylens_metrics(double bs, double lrh);

struct MetricsRecord {
  std::string run_id;
  int agents = 0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  double ce = 0.0;
  CoreMetrics core;
  double mi_avg = 0.0;
  double pi = 0.0;
  double ot = 0.0;
  double rc = 0.0;
  double rt = 1.0;
  double pari = 0.0;
};

// Fills rc = bs, rt = 1, pi and pari from the other fields.
void finalize_record(MetricsRecord& record, std::optional<double> mi_baseline,
                     const PariWeights& weights = {});

inline constexpr const char* kMetricsHeader =
    "run_id,N,beta,seed,ce_nats,bs,la,sb,bo,os,mi_avg_nats,pi,ot,rc,rt,pari";

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRecord>& records);
// Parses a file written by write_metrics_csv; throws std::runtime_error.
std::vector<MetricsRecord> read_metrics_csv(std::istream& is);

}  // namespace leakchain::eval

#endif  // LEAKCHAIN_EVAL_METRICS_HPP_
