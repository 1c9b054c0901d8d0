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

#ifndef LEAKCHAIN_EXACT_JOINT_DISTRIBUTION_HPP_
#define LEAKCHAIN_EXACT_JOINT_DISTRIBUTION_HPP_

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace leakchain::exact {

// Tolerance on total probability mass for tables supplied by callers.
inline constexpr double kMassTolerance = 1e-12;

// Information quantities below zero by more than this indicate a bug.
inline constexpr double kInfoFloor = 1e-9;

struct Variable {
  std::string name;
  int size = 0;

  friend bool operator==(const Variable&, const Variable&) = default;
};

using NameSet = std::vector<std::string>;

// Raised when a table or channel violates its probability invariants.
class ConstructionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when an exact table would exceed the configured entry cap.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Dense probability table over named finite-alphabet variables.
//
// Entries are stored row-major: the last variable varies fastest. The table
// is immutable after construction.
class JointDistribution {
 public:
  // Validates names, sizes, nonnegativity, and total mass.
  JointDistribution(std::vector<Variable> variables, std::vector<double> probs);

  const std::vector<Variable>& variables() const { return variables_; }
  std::span<const double> probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }

  bool contains(std::string_view name) const;
  // Position of `name` in variables(); throws std::invalid_argument.
  std::size_t index_of(std::string_view name) const;

  // Probability of one full assignment, one symbol per variable.
  double prob(std::span<const int> symbols) const;

  // Marginal over `names`, in the order given.
  JointDistribution marginal(std::span<const std::string> names) const;

  // Shannon entropy in nats of the marginal over `names`.
  double entropy(std::span<const std::string> names) const;

 private:
  struct Unchecked {};
  JointDistribution(Unchecked, std::vector<Variable> variables,
                    std::vector<double> probs);

  std::vector<std::size_t> IndicesOf(std::span<const std::string> names) const;
  std::vector<double> MarginalTable(std::span<const std::size_t> keep) const;

  std::vector<Variable> variables_;
  std::vector<double> probs_;
};

// I(X;Y|Z) in nats by exact marginalization. `z` may be empty. The result is
// floored at 0; a raw value below -kInfoFloor throws std::logic_error.
double mutual_information(const JointDistribution& joint, const NameSet& x,
                          const NameSet& y, const NameSet& z = {});

// Same quantity without the floor, for callers auditing numerical slack.
double raw_mutual_information(const JointDistribution& joint, const NameSet& x,
                              const NameSet& y, const NameSet& z = {});

inline double nats_to_bits(double nats) { return nats / 0.69314718055994530942; }

}  // namespace leakchain::exact

#endif  // LEAKCHAIN_EXACT_JOINT_DISTRIBUTION_HPP_
