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

#ifndef LEAKCHAIN_EXACT_PIPELINE_HPP_
#define LEAKCHAIN_EXACT_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "leakchain/exact/joint_distribution.hpp"

namespace leakchain::exact {

inline constexpr std::size_t kDefaultTableCap = 10'000'000;

// Conditional probability table p(out | inputs). Rows are indexed row-major
// over the input tuple (first input slowest).
class DiscreteChannel {
 public:
  DiscreteChannel(std::vector<int> input_sizes, int output_size,
                  std::vector<double> table);

  std::span<const int> input_sizes() const { return input_sizes_; }
  int output_size() const { return output_size_; }
  std::size_t row_count() const { return table_.size() / output_size_; }

  std::size_t row_index(std::span<const int> inputs) const;
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(table_).subspan(r * output_size_, output_size_);
  }
  double prob(std::size_t r, int out) const { return table_[r * output_size_ + out]; }

 private:
  std::vector<int> input_sizes_;
  int output_size_;
  std::vector<double> table_;
};

// N stages of channels (O_{i-1}, S_i) -> O_i with independent S_i priors.
// Stage 1 reads S_1 only. Stages are 0-based in code, named from 1 in tables:
// variables "S1".."SN" and "O1".."ON".
class DiscretePipelineSpec {
 public:
  DiscretePipelineSpec(std::vector<std::vector<double>> s_priors,
                       std::vector<DiscreteChannel> channels);

  std::size_t stages() const { return channels_.size(); }
  int s_size(std::size_t stage) const {
    return static_cast<int>(s_priors_[stage].size());
  }
  int o_size(std::size_t stage) const { return channels_[stage].output_size(); }
  std::span<const double> s_prior(std::size_t stage) const { return s_priors_[stage]; }
  const DiscreteChannel& channel(std::size_t stage) const { return channels_[stage]; }

  // Entry count of the full joint over (S_1..S_N, O_1..O_N).
  double joint_table_size() const;

 private:
  std::vector<std::vector<double>> s_priors_;
  std::vector<DiscreteChannel> channels_;
};

std::string s_name(std::size_t stage);  // "S<stage+1>"
std::string o_name(std::size_t stage);  // "O<stage+1>"

// Full joint over (S_1..S_N, O_1..O_N) in that variable order.
JointDistribution build_joint(const DiscretePipelineSpec& spec,
                              std::size_t cap = kDefaultTableCap);

// Exact p(S_1..S_i, O_i) for every stage i, by forward recursion over the
// Markov structure. Element i has variables S1..S(i+1), O(i+1).
std::vector<JointDistribution> stage_marginals(const DiscretePipelineSpec& spec);

struct LeakageProfile {
  std::vector<double> local;  // eps_i = I(O_i; S_i)
  double global = 0.0;        // I(O_N; S_1..S_N)
};

LeakageProfile leakage_profile(const DiscretePipelineSpec& spec,
                               std::size_t cap = kDefaultTableCap);

// sum_i 2^{N-i} eps_i, correctly rounded. Throws std::domain_error on a
// negative or nonfinite budget.
double theorem_bound(std::span<const double> epsilons);

// One stage of the proof chain audit. All values in nats.
struct StageCheck {
  double epsilon = 0.0;          // I(O_i; S_i)
  double conditional = 0.0;      // L_i = I(O_i; S_i | S_<i)
  double upstream_term = 0.0;    // I(S_i; S_<i | O_i)
  double upstream_bound = 0.0;   // I(S_<i; O_{i-1})
  double final_conditional = 0.0;  // I(O_N; S_i | S_<i)
  double cumulative = 0.0;       // U_i = sum_{j<=i} L_j

  double cdpi_slack = 0.0;        // L_i - I(O_N; S_i | S_<i)
  double identity_residual = 0.0;  // L_i - eps_i - upstream_term
  double upstream_slack = 0.0;    // upstream_bound - upstream_term
  double recurrence_slack = 0.0;  // eps_i + 2 U_{i-1} - U_i
  double dpi_slack = 0.0;         // I(S_<i; O_{i-1}) - I(S_<i; O_i)

  // Smallest of the inequality slacks above.
  double min_slack() const;
};

struct BoundReport {
  std::vector<StageCheck> stages;
  double global = 0.0;          // I(O_N; S_1..S_N)
  double chain_rule_sum = 0.0;  // sum_i I(O_N; S_i | S_<i)
  double bound = 0.0;           // theorem_bound(eps)
  bool pass = false;

  std::vector<double> epsilons() const;
  double ratio() const { return bound > 0.0 ? global / bound : 0.0; }
};

// Failure detail for the first check that misses its tolerance.
class VerificationFailure : public std::runtime_error {
 public:
  VerificationFailure(const std::string& what, std::size_t stage, double slack)
      : std::runtime_error(what), stage_(stage), slack_(slack) {}
  std::size_t stage() const { return stage_; }
  double slack() const { return slack_; }

 private:
  std::size_t stage_;
  double slack_;
};

// Audits every step of the cumulative bound's proof on one pipeline. Throws
// VerificationFailure on any check outside tolerance, CapacityError when the
// full joint would exceed `cap`.
BoundReport verify_bound_chain(const DiscretePipelineSpec& spec,
                               std::size_t cap = kDefaultTableCap,
                               double tolerance = kInfoFloor);

// Writes the per-stage rows and the summary row.
void write_bound_csv(std::ostream& os, const BoundReport& report);

enum class MapStructure {
  kRandom,  // each input tuple maps to a uniformly drawn output symbol
  kCopy,    // stage 1: o = s; later stages: o = (o_prev + s) mod |O|
};

struct PipelineShape {
  std::vector<int> s_sizes;
  std::vector<int> o_sizes;
};

// Each channel is leak * (deterministic map) + (1 - leak) * uniform.
// S_i priors are uniform. Deterministic in `seed`.
DiscretePipelineSpec random_pipeline(std::uint64_t seed, const PipelineShape& shape,
                                     double leak,
                                     MapStructure structure = MapStructure::kRandom);

// Random shape with N stages and alphabets drawn from [2, max_alphabet].
PipelineShape random_shape(std::uint64_t seed, std::size_t stages, int max_alphabet);

// S_1, S_2 uniform bits; O_1 = S_1; O_2 = O_1 xor S_2.
DiscretePipelineSpec xor_pipeline();

}  // namespace leakchain::exact

#endif  // LEAKCHAIN_EXACT_PIPELINE_HPP_
