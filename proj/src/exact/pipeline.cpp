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

#include "leakchain/exact/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

namespace leakchain::exact {

namespace {

void CheckDistribution(std::span<const double> p, const std::string& what) {
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConstructionError(what + " has a negative or nonfinite entry");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os << what << " sums to " << std::setprecision(17) << total;
    throw ConstructionError(os.str());
  }
}

NameSet SPrefix(std::size_t count) {
  NameSet names;
  for (std::size_t j = 0; j < count; ++j) names.push_back(s_name(j));
  return names;
}

// Shewchuk's exact partial sums; the result is the correctly rounded sum.
double CorrectlyRoundedSum(std::span<const double> values) {
  std::vector<double> partials;
  for (double x : values) {
    std::size_t i = 0;
    for (double y : partials) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials[i++] = lo;
      x = hi;
    }
    partials.resize(i);
    partials.push_back(x);
  }
  if (partials.empty()) return 0.0;
  // Sum from the top, fixing up the half-way rounding case.
  std::size_t n = partials.size();
  double hi = partials[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = partials[--n];
    hi = x + y;
    const double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) ||
                (lo > 0.0 && partials[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

}  // namespace

std::string s_name(std::size_t stage) { return "S" + std::to_string(stage + 1); }
std::string o_name(std::size_t stage) { return "O" + std::to_string(stage + 1); }

DiscreteChannel::DiscreteChannel(std::vector<int> input_sizes, int output_size,
                                 std::vector<double> table)
    : input_sizes_(std::move(input_sizes)),
      output_size_(output_size),
      table_(std::move(table)) {
  if (output_size_ < 1) throw ConstructionError("channel output alphabet is empty");
  std::size_t rows = 1;
  for (int s : input_sizes_) {
    if (s < 1) throw ConstructionError("channel input alphabet is empty");
    rows *= static_cast<std::size_t>(s);
  }
  if (table_.size() != rows * static_cast<std::size_t>(output_size_)) {
    throw ConstructionError("channel table has " + std::to_string(table_.size()) +
                            " entries, expected " +
                            std::to_string(rows * output_size_));
  }
  for (std::size_t r = 0; r < rows; ++r) {
    CheckDistribution(row(r), "channel row " + std::to_string(r));
  }
}

std::size_t DiscreteChannel::row_index(std::span<const int> inputs) const {
  if (inputs.size() != input_sizes_.size()) {
    throw std::invalid_argument("channel input arity mismatch");
  }
  std::size_t r = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i] < 0 || inputs[i] >= input_sizes_[i]) {
      throw std::out_of_range("channel input symbol out of range");
    }
    r = r * input_sizes_[i] + inputs[i];
  }
  return r;
}

DiscretePipelineSpec::DiscretePipelineSpec(std::vector<std::vector<double>> s_priors,
                                           std::vector<DiscreteChannel> channels)
    : s_priors_(std::move(s_priors)), channels_(std::move(channels)) {
  if (channels_.empty()) throw ConstructionError("pipeline needs at least one stage");
  if (s_priors_.size() != channels_.size()) {
    throw ConstructionError("one sensitive prior per stage is required");
  }
  for (std::size_t i = 0; i < stages(); ++i) {
    if (s_priors_[i].empty()) throw ConstructionError("empty sensitive alphabet");
    CheckDistribution(s_priors_[i], "prior of " + s_name(i));
    const auto in = channels_[i].input_sizes();
    if (i == 0) {
      if (in.size() != 1 || in[0] != s_size(0)) {
        throw ConstructionError("stage 1 channel must read S1 only");
      }
    } else if (in.size() != 2 || in[0] != o_size(i - 1) || in[1] != s_size(i)) {
      throw ConstructionError("stage " + std::to_string(i + 1) +
                              " channel must read (" + o_name(i - 1) + ", " +
                              s_name(i) + ")");
    }
  }
}

double DiscretePipelineSpec::joint_table_size() const {
  double n = 1.0;
  for (std::size_t i = 0; i < stages(); ++i) n *= double(s_size(i)) * o_size(i);
  return n;
}

JointDistribution build_joint(const DiscretePipelineSpec& spec, std::size_t cap) {
  const double size = spec.joint_table_size();
  if (size > static_cast<double>(cap)) {
    std::ostringstream os;
    os << "joint table needs " << size << " entries, cap is " << cap;
    throw CapacityError(os.str());
  }
  const std::size_t n = spec.stages();
  std::vector<Variable> vars;
  for (std::size_t i = 0; i < n; ++i) vars.push_back({s_name(i), spec.s_size(i)});
  for (std::size_t i = 0; i < n; ++i) vars.push_back({o_name(i), spec.o_size(i)});

  std::vector<double> probs(static_cast<std::size_t>(size));
  std::vector<int> sym(2 * n, 0);  // s_1..s_N, o_1..o_N
  for (double& cell : probs) {
    double p = 1.0;
    for (std::size_t i = 0; i < n && p > 0.0; ++i) {
      p *= spec.s_prior(i)[sym[i]];
      const auto& ch = spec.channel(i);
      const std::size_t row =
          i == 0 ? static_cast<std::size_t>(sym[0])
                 : static_cast<std::size_t>(sym[n + i - 1]) * spec.s_size(i) + sym[i];
      p *= ch.prob(row, sym[n + i]);
    }
    cell = p;
    for (std::size_t v = 2 * n; v-- > 0;) {
      if (++sym[v] < vars[v].size) break;
      sym[v] = 0;
    }
  }
  return JointDistribution(std::move(vars), std::move(probs));
}

std::vector<JointDistribution> stage_marginals(const DiscretePipelineSpec& spec) {
  std::vector<JointDistribution> out;
  out.reserve(spec.stages());
  // prev[(s_prefix index) * |O_{i-1}| + o] = p(s_<i, o_{i-1})
  std::vector<double> prev;
  std::size_t prefix = 1;
  for (std::size_t i = 0; i < spec.stages(); ++i) {
    const int ks = spec.s_size(i);
    const int ko = spec.o_size(i);
    const auto prior = spec.s_prior(i);
    const auto& ch = spec.channel(i);
    std::vector<double> next(prefix * ks * ko, 0.0);
    if (i == 0) {
      for (int s = 0; s < ks; ++s) {
        for (int o = 0; o < ko; ++o) next[s * ko + o] = prior[s] * ch.prob(s, o);
      }
    } else {
      const int kprev = spec.o_size(i - 1);
      for (std::size_t a = 0; a < prefix; ++a) {
        for (int op = 0; op < kprev; ++op) {
          const double base = prev[a * kprev + op];
          if (base == 0.0) continue;
          for (int s = 0; s < ks; ++s) {
            const auto row = ch.row(static_cast<std::size_t>(op) * ks + s);
            double* dst = &next[(a * ks + s) * ko];
            const double w = base * prior[s];
            for (int o = 0; o < ko; ++o) dst[o] += w * row[o];
          }
        }
      }
    }
    std::vector<Variable> vars;
    for (std::size_t j = 0; j <= i; ++j) vars.push_back({s_name(j), spec.s_size(j)});
    vars.push_back({o_name(i), ko});
    out.emplace_back(std::move(vars), next);
    prev = std::move(next);
    prefix *= static_cast<std::size_t>(ks);
  }
  return out;
}

LeakageProfile leakage_profile(const DiscretePipelineSpec& spec, std::size_t cap) {
  if (spec.joint_table_size() > static_cast<double>(cap)) {
    throw CapacityError("pipeline exceeds the exact table cap");
  }
  const auto marginals = stage_marginals(spec);
  LeakageProfile profile;
  for (std::size_t i = 0; i < spec.stages(); ++i) {
    profile.local.push_back(
        mutual_information(marginals[i], {o_name(i)}, {s_name(i)}));
  }
  const std::size_t last = spec.stages() - 1;
  profile.global =
      mutual_information(marginals[last], {o_name(last)}, SPrefix(spec.stages()));
  return profile;
}

double theorem_bound(std::span<const double> epsilons) {
  std::vector<double> terms;
  terms.reserve(epsilons.size());
  const int n = static_cast<int>(epsilons.size());
  for (int i = 0; i < n; ++i) {
    const double e = epsilons[i];
    if (!(e >= 0.0) || !std::isfinite(e)) {
      throw std::domain_error("leakage budgets must be finite and nonnegative");
    }
    terms.push_back(std::ldexp(e, n - 1 - i));
  }
  return CorrectlyRoundedSum(terms);
}

double StageCheck::min_slack() const {
  return std::min({cdpi_slack, upstream_slack, recurrence_slack, dpi_slack,
                   -std::abs(identity_residual)});
}

std::vector<double> BoundReport::epsilons() const {
  std::vector<double> eps;
  for (const auto& s : stages) eps.push_back(s.epsilon);
  return eps;
}

BoundReport verify_bound_chain(const DiscretePipelineSpec& spec, std::size_t cap,
                               double tolerance) {
  if (spec.joint_table_size() > static_cast<double>(cap)) {
    throw CapacityError("pipeline exceeds the exact table cap");
  }
  const std::size_t n = spec.stages();
  const auto m = stage_marginals(spec);
  const auto& last = m[n - 1];

  BoundReport report;
  double prev_cumulative = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const NameSet before = SPrefix(i);
    const NameSet si = {s_name(i)};
    const NameSet oi = {o_name(i)};
    StageCheck c;
    c.epsilon = mutual_information(m[i], oi, si);
    c.conditional = mutual_information(m[i], oi, si, before);
    c.final_conditional = mutual_information(last, {o_name(n - 1)}, si, before);
    if (i > 0) {
      c.upstream_term = mutual_information(m[i], si, before, oi);
      c.upstream_bound = mutual_information(m[i - 1], before, {o_name(i - 1)});
      c.dpi_slack = c.upstream_bound - mutual_information(m[i], before, oi);
    }
    c.cumulative = prev_cumulative + c.conditional;
    c.cdpi_slack = c.conditional - c.final_conditional;
    c.identity_residual = c.conditional - c.epsilon - c.upstream_term;
    c.upstream_slack = c.upstream_bound - c.upstream_term;
    c.recurrence_slack = c.epsilon + 2.0 * prev_cumulative - c.cumulative;
    prev_cumulative = c.cumulative;
    report.stages.push_back(c);
    report.chain_rule_sum += c.final_conditional;
  }
  report.global = mutual_information(last, {o_name(n - 1)}, SPrefix(n));
  report.bound = theorem_bound(report.epsilons());

  auto fail = [&](const std::string& what, std::size_t stage, double slack) {
    std::ostringstream os;
    os << what << " violated at stage " << stage + 1 << " (slack "
       << std::setprecision(6) << slack << ")";
    throw VerificationFailure(os.str(), stage + 1, slack);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = report.stages[i];
    if (c.cdpi_slack < -tolerance) fail("conditional data processing", i, c.cdpi_slack);
    if (std::abs(c.identity_residual) > tolerance) {
      fail("conditional leakage decomposition", i, -std::abs(c.identity_residual));
    }
    if (c.upstream_slack < -tolerance) fail("upstream leakage bound", i, c.upstream_slack);
    if (c.recurrence_slack < -tolerance) fail("leakage recurrence", i, c.recurrence_slack);
    if (c.dpi_slack < -tolerance) fail("data processing", i, c.dpi_slack);
  }
  if (std::abs(report.global - report.chain_rule_sum) > tolerance) {
    fail("chain rule", n - 1, -std::abs(report.global - report.chain_rule_sum));
  }
  const double u_n = report.stages.back().cumulative;
  if (u_n - report.global < -tolerance) fail("reduced sum", n - 1, u_n - report.global);
  if (report.bound - report.global < -tolerance) {
    fail("cumulative bound", n - 1, report.bound - report.global);
  }
  report.pass = true;
  return report;
}

void write_bound_csv(std::ostream& os, const BoundReport& report) {
  const auto flags = os.flags();
  const auto precision = os.precision();
  os << std::setprecision(12);
  os << "stage,epsilon_nats,L_i_nats,upstream_term_nats,slack\n";
  for (std::size_t i = 0; i < report.stages.size(); ++i) {
    const auto& c = report.stages[i];
    os << i + 1 << ',' << c.epsilon << ',' << c.conditional << ','
       << c.upstream_term << ',' << c.min_slack() << '\n';
  }
  os << "global_nats,bound_nats,pass\n";
  os << report.global << ',' << report.bound << ',' << (report.pass ? 1 : 0) << '\n';
  os.flags(flags);
  os.precision(precision);
}

PipelineShape random_shape(std::uint64_t seed, std::size_t stages, int max_alphabet) {
  if (stages < 1) throw std::invalid_argument("pipeline needs at least one stage");
  if (max_alphabet < 2) throw std::invalid_argument("alphabets must allow >= 2 symbols");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size(2, max_alphabet);
  PipelineShape shape;
  for (std::size_t i = 0; i < stages; ++i) {
    shape.s_sizes.push_back(size(rng));
    shape.o_sizes.push_back(size(rng));
  }
  return shape;
}

DiscretePipelineSpec random_pipeline(std::uint64_t seed, const PipelineShape& shape,
                                     double leak, MapStructure structure) {
  const std::size_t n = shape.s_sizes.size();
  if (n < 1 || shape.o_sizes.size() != n) {
    throw std::invalid_argument("shape needs matching, nonempty S and O alphabets");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (shape.s_sizes[i] < 2 || shape.o_sizes[i] < 2) {
      throw std::invalid_argument("alphabet sizes must be >= 2");
    }
  }
  if (!(leak >= 0.0 && leak <= 1.0)) {
    throw std::invalid_argument("leak level must lie in [0, 1]");
  }

  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> priors;
  std::vector<DiscreteChannel> channels;
  for (std::size_t i = 0; i < n; ++i) {
    const int ks = shape.s_sizes[i];
    const int ko = shape.o_sizes[i];
    priors.emplace_back(ks, 1.0 / ks);
    std::vector<int> inputs = i == 0 ? std::vector<int>{ks}
                                     : std::vector<int>{shape.o_sizes[i - 1], ks};
    const int kprev = i == 0 ? 1 : shape.o_sizes[i - 1];
    std::uniform_int_distribution<int> pick(0, ko - 1);
    std::vector<double> table;
    table.reserve(static_cast<std::size_t>(kprev) * ks * ko);
    for (int op = 0; op < kprev; ++op) {
      for (int s = 0; s < ks; ++s) {
        const int target = structure == MapStructure::kCopy ? (op + s) % ko : pick(rng);
        for (int o = 0; o < ko; ++o) {
          table.push_back((1.0 - leak) / ko + (o == target ? leak : 0.0));
        }
      }
    }
    channels.emplace_back(std::move(inputs), ko, std::move(table));
  }
  return DiscretePipelineSpec(std::move(priors), std::move(channels));
}

DiscretePipelineSpec xor_pipeline() {
  std::vector<std::vector<double>> priors = {{0.5, 0.5}, {0.5, 0.5}};
  std::vector<DiscreteChannel> channels;
  channels.emplace_back(std::vector<int>{2}, 2, std::vector<double>{1, 0, 0, 1});
  // Rows (o1, s2): (0,0)->0, (0,1)->1, (1,0)->1, (1,1)->0.
  channels.emplace_back(std::vector<int>{2, 2}, 2,
                        std::vector<double>{1, 0, 0, 1, 0, 1, 1, 0});
  return DiscretePipelineSpec(std::move(priors), std::move(channels));
}

}  // namespace leakchain::exact
