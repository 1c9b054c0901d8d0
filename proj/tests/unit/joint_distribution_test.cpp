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

#include "leakchain/exact/joint_distribution.hpp"

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "gtest/gtest.h"

namespace leakchain::exact {
namespace {

const double kLn2 = std::log(2.0);

JointDistribution BinarySymmetric(double flip) {
  return JointDistribution({{"S", 2}, {"O", 2}},
                           {0.5 * (1 - flip), 0.5 * flip, 0.5 * flip, 0.5 * (1 - flip)});
}

// Entropy by explicit enumeration of full assignments into a std::map keyed
// by the projected tuple. Shares no code with the library's marginalizer.
double BruteEntropy(const JointDistribution& joint, const std::vector<int>& keep) {
  const auto& vars = joint.variables();
  std::map<std::vector<int>, double> table;
  std::vector<int> sym(vars.size(), 0);
  for (std::size_t cell = 0; cell < joint.size(); ++cell) {
    std::size_t rest = cell;
    for (std::size_t v = vars.size(); v-- > 0;) {
      sym[v] = static_cast<int>(rest % vars[v].size);
      rest /= vars[v].size;
    }
    std::vector<int> key;
    for (int k : keep) key.push_back(sym[k]);
    table[key] += joint.probs()[cell];
  }
  double h = 0.0;
  for (const auto& [key, p] : table) {
    if (p > 0) h -= p * std::log(p);
  }
  return h;
}

double BruteCmi(const JointDistribution& joint, std::vector<int> x, std::vector<int> y,
                std::vector<int> z) {
  auto cat = [](std::vector<int> a, const std::vector<int>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  return BruteEntropy(joint, cat(x, z)) + BruteEntropy(joint, cat(y, z)) -
         BruteEntropy(joint, cat(cat(x, y), z)) - BruteEntropy(joint, z);
}

JointDistribution RandomJoint(std::mt19937_64& rng, std::vector<int> sizes) {
  std::vector<Variable> vars;
  std::size_t n = 1;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    vars.push_back({"V" + std::to_string(i), sizes[i]});
    n *= sizes[i];
  }
  std::exponential_distribution<double> draw(1.0);
  std::bernoulli_distribution zero(0.2);
  std::vector<double> p(n);
  double total = 0;
  for (auto& v : p) {
    v = zero(rng) ? 0.0 : draw(rng);
    total += v;
  }
  for (auto& v : p) v /= total;
  return JointDistribution(std::move(vars), std::move(p));
}

TEST(JointDistributionTest, RejectsInvalidTables) {
  EXPECT_THROW(JointDistribution({{"A", 2}}, {0.5, 0.4}), ConstructionError);
  EXPECT_THROW(JointDistribution({{"A", 2}}, {1.5, -0.5}), ConstructionError);
  EXPECT_THROW(JointDistribution({{"A", 2}, {"A", 2}}, {0.25, 0.25, 0.25, 0.25}),
               ConstructionError);
  EXPECT_THROW(JointDistribution({{"A", 2}}, {1.0}), ConstructionError);
}

TEST(JointDistributionTest, MarginalReordersVariables) {
  JointDistribution joint({{"A", 2}, {"B", 3}},
                          {0.1, 0.2, 0.05, 0.3, 0.15, 0.2});
  std::vector<std::string> order = {"B", "A"};
  const auto m = joint.marginal(order);
  ASSERT_EQ(m.variables()[0].name, "B");
  std::vector<int> b2a1 = {2, 1};
  EXPECT_DOUBLE_EQ(m.prob(b2a1), 0.2);
  std::vector<std::string> only_a = {"A"};
  const auto a = joint.marginal(only_a);
  EXPECT_NEAR(a.probs()[0], 0.35, 1e-15);
  EXPECT_NEAR(a.probs()[1], 0.65, 1e-15);
}

TEST(MutualInformationTest, IndependentBitsCarryNothing) {
  JointDistribution joint({{"X", 2}, {"Y", 2}}, {0.25, 0.25, 0.25, 0.25});
  EXPECT_EQ(mutual_information(joint, {"X"}, {"Y"}), 0.0);
}

TEST(MutualInformationTest, CopyChannelCarriesOneBit) {
  EXPECT_NEAR(mutual_information(BinarySymmetric(0.0), {"O"}, {"S"}), kLn2, 1e-15);
}

TEST(MutualInformationTest, BinarySymmetricChannelMatchesClosedForm) {
  const double hb = -0.25 * std::log(0.25) - 0.75 * std::log(0.75);
  const double mi = mutual_information(BinarySymmetric(0.25), {"O"}, {"S"});
  EXPECT_NEAR(mi, kLn2 - hb, 1e-14);
  EXPECT_NEAR(mi, 0.130812, 1e-6);
}

TEST(MutualInformationTest, RejectsUnknownAndOverlappingNames) {
  const auto joint = BinarySymmetric(0.1);
  EXPECT_THROW(mutual_information(joint, {"O"}, {"Q"}), std::invalid_argument);
  EXPECT_THROW(mutual_information(joint, {"O"}, {"O"}), std::invalid_argument);
  EXPECT_THROW(mutual_information(joint, {"O"}, {"S"}, {"S"}), std::invalid_argument);
}

TEST(MutualInformationTest, MatchesBruteForceEntropyOracle) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto joint = RandomJoint(rng, {2, 3, 2, 4});
    const double lib = mutual_information(joint, {"V0", "V3"}, {"V1"}, {"V2"});
    EXPECT_NEAR(lib, BruteCmi(joint, {0, 3}, {1}, {2}), 1e-12);
    const double sym = mutual_information(joint, {"V1"}, {"V0", "V3"}, {"V2"});
    EXPECT_NEAR(lib, sym, 1e-12);
    EXPECT_GE(raw_mutual_information(joint, {"V0"}, {"V2"}), -kInfoFloor);
    EXPECT_NEAR(mutual_information(joint, {"V0"}, {"V2"}), BruteCmi(joint, {0}, {2}, {}),
                1e-12);
  }
}

TEST(MutualInformationTest, ChainRuleOnRandomTables) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto joint = RandomJoint(rng, {3, 2, 2, 3});
    const double whole = mutual_information(joint, {"V0"}, {"V1", "V2", "V3"});
    const double parts = mutual_information(joint, {"V0"}, {"V1"}) +
                         mutual_information(joint, {"V0"}, {"V2"}, {"V1"}) +
                         mutual_information(joint, {"V0"}, {"V3"}, {"V1", "V2"});
    EXPECT_NEAR(whole, parts, 1e-12);
  }
}

TEST(MutualInformationTest, BitConversion) {
  EXPECT_NEAR(nats_to_bits(kLn2), 1.0, 1e-15);
}

}  // namespace
}  // namespace leakchain::exact
