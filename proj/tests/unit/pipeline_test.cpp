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

#include <cmath>
#include <sstream>
#include <vector>

#include "gtest/gtest.h"

namespace leakchain::exact {
namespace {

const double kLn2 = std::log(2.0);

NameSet Prefix(std::size_t count) {
  NameSet names;
  for (std::size_t j = 0; j < count; ++j) names.push_back(s_name(j));
  return names;
}

DiscretePipelineSpec CopyBit() {
  return DiscretePipelineSpec({{0.5, 0.5}},
                              {DiscreteChannel({2}, 2, {1, 0, 0, 1})});
}

TEST(BuildJointTest, CopyChannelPutsMassOnDiagonal) {
  const auto joint = build_joint(CopyBit());
  std::vector<int> a = {0, 0}, b = {1, 1}, c = {0, 1};
  EXPECT_DOUBLE_EQ(joint.prob(a), 0.5);
  EXPECT_DOUBLE_EQ(joint.prob(b), 0.5);
  EXPECT_DOUBLE_EQ(joint.prob(c), 0.0);
}

TEST(BuildJointTest, XorPipelineHasFourEqualOutcomes) {
  const auto joint = build_joint(xor_pipeline());
  ASSERT_EQ(joint.size(), 16u);  // S1,S2,O1,O2 bits
  int support = 0;
  for (int s1 = 0; s1 < 2; ++s1) {
    for (int s2 = 0; s2 < 2; ++s2) {
      for (int o1 = 0; o1 < 2; ++o1) {
        for (int o2 = 0; o2 < 2; ++o2) {
          std::vector<int> t = {s1, s2, o1, o2};
          const bool consistent = o1 == s1 && o2 == (s1 ^ s2);
          EXPECT_DOUBLE_EQ(joint.prob(t), consistent ? 0.25 : 0.0);
          support += consistent;
        }
      }
    }
  }
  EXPECT_EQ(support, 4);
}

TEST(BuildJointTest, RejectsBadRowsAndMismatchedStages) {
  EXPECT_THROW(DiscreteChannel({2}, 2, {0.5, 0.4, 0.5, 0.5}), ConstructionError);
  EXPECT_THROW(DiscretePipelineSpec({{0.5, 0.5}, {0.5, 0.5}},
                                    {DiscreteChannel({2}, 2, {1, 0, 0, 1}),
                                     DiscreteChannel({3, 2}, 2,
                                                     std::vector<double>(12, 0.5))}),
               ConstructionError);
  EXPECT_THROW(DiscretePipelineSpec({{0.6, 0.6}}, {DiscreteChannel({2}, 2, {1, 0, 0, 1})}),
               ConstructionError);
}

TEST(BuildJointTest, CapacityCapIsExplicit) {
  PipelineShape shape{std::vector<int>(12, 4), std::vector<int>(12, 4)};
  const auto spec = random_pipeline(1, shape, 0.5);
  EXPECT_THROW(build_joint(spec), CapacityError);
  EXPECT_THROW(verify_bound_chain(spec), CapacityError);
  EXPECT_THROW(build_joint(CopyBit(), 3), CapacityError);
}

TEST(StageMarginalsTest, AgreeWithFullJoint) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto spec = random_pipeline(seed, random_shape(seed + 100, 4, 3), 0.7);
    const auto joint = build_joint(spec);
    const auto marginals = stage_marginals(spec);
    for (std::size_t i = 0; i < spec.stages(); ++i) {
      NameSet names = Prefix(i + 1);
      names.push_back(o_name(i));
      const auto direct = joint.marginal(names);
      ASSERT_EQ(direct.size(), marginals[i].size());
      for (std::size_t k = 0; k < direct.size(); ++k) {
        EXPECT_NEAR(direct.probs()[k], marginals[i].probs()[k], 1e-13);
      }
    }
  }
}

TEST(LeakageProfileTest, XorWitness) {
  const auto profile = leakage_profile(xor_pipeline());
  ASSERT_EQ(profile.local.size(), 2u);
  EXPECT_NEAR(profile.local[0], kLn2, 1e-12);
  EXPECT_NEAR(profile.local[1], 0.0, 1e-12);
  EXPECT_NEAR(profile.global, kLn2, 1e-12);

  const auto joint = build_joint(xor_pipeline());
  EXPECT_NEAR(mutual_information(joint, {"O2"}, {"S2"}), 0.0, 1e-12);
  EXPECT_NEAR(mutual_information(joint, {"O2"}, {"S2"}, {"S1"}), kLn2, 1e-12);
  EXPECT_NEAR(mutual_information(joint, {"O2"}, {"S1", "S2"}), kLn2, 1e-12);
}

TEST(LeakageProfileTest, UninformativeChannelsLeakNothing) {
  const auto spec = random_pipeline(3, random_shape(4, 4, 4), 0.0);
  const auto profile = leakage_profile(spec);
  for (double e : profile.local) EXPECT_NEAR(e, 0.0, 1e-14);
  EXPECT_NEAR(profile.global, 0.0, 1e-14);
}

TEST(LeakageProfileTest, SingleCopyStage) {
  const auto profile = leakage_profile(CopyBit());
  EXPECT_NEAR(profile.local[0], kLn2, 1e-15);
  EXPECT_NEAR(profile.global, kLn2, 1e-15);
}

TEST(LeakageProfileTest, ProfileMatchesFullJoint) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto spec = random_pipeline(seed, random_shape(seed, 3, 4), 0.8);
    const auto profile = leakage_profile(spec);
    const auto joint = build_joint(spec);
    for (std::size_t i = 0; i < spec.stages(); ++i) {
      EXPECT_NEAR(profile.local[i], mutual_information(joint, {o_name(i)}, {s_name(i)}),
                  1e-12);
    }
    EXPECT_NEAR(profile.global, mutual_information(joint, {"O3"}, Prefix(3)), 1e-12);
  }
}

TEST(TheoremBoundTest, FormulaValues) {
  const std::vector<double> uniform = {0.1, 0.1, 0.1};
  EXPECT_DOUBLE_EQ(theorem_bound(uniform), 0.7);
  const std::vector<double> zero = {0.0};
  EXPECT_EQ(theorem_bound(zero), 0.0);
  const std::vector<double> mixed = {0.1, 0.2, 0.3};
  EXPECT_NEAR(theorem_bound(mixed), 1.1, 1e-15);
  const std::vector<double> negative = {0.1, -0.1};
  EXPECT_THROW(theorem_bound(negative), std::domain_error);
}

TEST(TheoremBoundTest, UniformCaseIsExactAndCoefficientsArePowersOfTwo) {
  for (double eps : {0.1, 0.3, 0.7, 1e-3, 0.123456789, 2.5}) {
    for (int n = 1; n <= 10; ++n) {
      std::vector<double> e(n, eps);
      EXPECT_EQ(theorem_bound(e), ((1 << n) - 1) * eps) << eps << " N=" << n;
    }
  }
  for (int n = 1; n <= 10; ++n) {
    for (int i = 0; i < n; ++i) {
      std::vector<double> unit(n, 0.0);
      unit[i] = 1.0;
      EXPECT_EQ(theorem_bound(unit), std::ldexp(1.0, n - 1 - i));
    }
  }
}

TEST(VerifyBoundChainTest, XorPasses) {
  const auto report = verify_bound_chain(xor_pipeline());
  EXPECT_TRUE(report.pass);
  EXPECT_NEAR(report.global, kLn2, 1e-12);
  EXPECT_NEAR(report.bound, 2 * kLn2, 1e-12);
  for (const auto& s : report.stages) EXPECT_NEAR(s.identity_residual, 0.0, 1e-9);
}

TEST(VerifyBoundChainTest, SingleStageIsTight) {
  const auto report = verify_bound_chain(CopyBit());
  EXPECT_TRUE(report.pass);
  EXPECT_DOUBLE_EQ(report.global, report.stages[0].epsilon);
  EXPECT_DOUBLE_EQ(report.bound, report.stages[0].epsilon);
}

TEST(VerifyBoundChainTest, NegativeToleranceForcesFailure) {
  try {
    verify_bound_chain(xor_pipeline(), kDefaultTableCap, -1.0);
    FAIL() << "expected a verification failure";
  } catch (const VerificationFailure& e) {
    EXPECT_GE(e.stage(), 1u);
    EXPECT_LE(e.slack(), 1.0);
  }
}

TEST(VerifyBoundChainTest, FuzzedPipelinesSatisfyEveryStep) {
  for (std::size_t n = 2; n <= 5; ++n) {
    for (std::uint64_t k = 0; k < 150; ++k) {
      const std::uint64_t seed = n * 100000 + k;
      const double leak = static_cast<double>(k % 11) / 10.0;
      const auto spec = random_pipeline(seed, random_shape(seed, n, 4), leak);
      const auto report = verify_bound_chain(spec);
      ASSERT_TRUE(report.pass);
      EXPECT_NEAR(report.global, report.chain_rule_sum, 1e-9);
      EXPECT_LE(report.global, report.bound + 1e-9);
      for (const auto& s : report.stages) EXPECT_GE(s.dpi_slack, -1e-9);
    }
  }
}

TEST(RandomPipelineTest, DeterministicInSeed) {
  const auto shape = random_shape(9, 3, 4);
  const auto a = random_pipeline(42, shape, 0.6);
  const auto b = random_pipeline(42, shape, 0.6);
  for (std::size_t i = 0; i < a.stages(); ++i) {
    for (std::size_t r = 0; r < a.channel(i).row_count(); ++r) {
      const auto ra = a.channel(i).row(r);
      const auto rb = b.channel(i).row(r);
      EXPECT_TRUE(std::equal(ra.begin(), ra.end(), rb.begin()));
    }
  }
}

TEST(RandomPipelineTest, FullLeakCopyStageRevealsWholeAlphabet) {
  for (int k = 2; k <= 4; ++k) {
    PipelineShape shape{{k, k}, {k, k}};
    const auto profile = leakage_profile(random_pipeline(1, shape, 1.0, MapStructure::kCopy));
    EXPECT_NEAR(profile.local[0], std::log(k), 1e-12);
  }
}

TEST(RandomPipelineTest, RejectsBadParameters) {
  EXPECT_THROW(random_pipeline(1, {{1}, {2}}, 0.5), std::invalid_argument);
  EXPECT_THROW(random_pipeline(1, {{2}, {2}}, 1.5), std::invalid_argument);
  EXPECT_THROW(random_pipeline(1, {{}, {}}, 0.5), std::invalid_argument);
}

TEST(BoundCsvTest, HasStageRowsAndSummary) {
  std::ostringstream os;
  write_bound_csv(os, verify_bound_chain(xor_pipeline()));
  const std::string csv = os.str();
  EXPECT_EQ(csv.rfind("stage,epsilon_nats,L_i_nats,upstream_term_nats,slack\n", 0), 0u);
  EXPECT_NE(csv.find("\n1,0.69314718056,"), std::string::npos);
  EXPECT_NE(csv.find("global_nats,bound_nats,pass\n0.69314718056,1.38629436112,1\n"),
            std::string::npos);
}

}  // namespace
}  // namespace leakchain::exact
