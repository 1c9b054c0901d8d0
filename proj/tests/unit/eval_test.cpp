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

#include <cmath>
#include <sstream>
#include <vector>

#include "gtest/gtest.h"
#include "leakchain/eval/metrics.hpp"
#include "leakchain/eval/pipeline_eval.hpp"
#include "leakchain/eval/probe.hpp"
#include "leakchain/exact/pipeline.hpp"
#include "leakchain/train/trainer.hpp"

namespace leakchain::eval {
namespace {

std::vector<int> UniformLabels(int n, int k, nn::Rng& rng) {
  std::uniform_int_distribution<int> d(0, k - 1);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int& v : y) v = d(rng);
  return y;
}

TEST(ProbeTest, ChanceLevelOnIndependentRepresentations) {
  nn::Rng rng(1);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 3; ++trial) {
    const Matrix reps = Matrix::NullaryExpr(2000, 16, [&] { return g(rng); });
    const auto y = UniformLabels(2000, 4, rng);
    ProbeConfig cfg;
    cfg.seed = trial;
    const double acc = train_probe(reps, y, 4, cfg).accuracy;
    EXPECT_GE(acc, 0.20);
    EXPECT_LE(acc, 0.30);
  }
}

TEST(ProbeTest, OneHotPassthroughIsDecodable) {
  nn::Rng rng(2);
  const auto y = UniformLabels(2000, 4, rng);
  const auto r = train_probe(nn::one_hot(y, 4), y, 4, {});
  EXPECT_GE(r.accuracy, 0.99);
  EXPECT_EQ(r.train_rows, 1000);
  EXPECT_EQ(r.test_rows, 1000);
}

TEST(ProbeTest, RejectsDegenerateTargets) {
  const Matrix reps = Matrix::Random(10, 3);
  const std::vector<int> single(10, 2);
  EXPECT_THROW(train_probe(reps, single, 4, {}), std::invalid_argument);
  const std::vector<int> short_targets(9, 0);
  EXPECT_THROW(train_probe(reps, short_targets, 4, {}), std::invalid_argument);
  std::vector<int> out_of_range(10, 0);
  out_of_range[3] = 4;
  EXPECT_THROW(train_probe(reps, out_of_range, 4, {}), std::invalid_argument);
}

TEST(CoreMetricsTest, DirectFormulas) {
  // 9 of 10 correct.
  std::vector<int> pred(10, 1), labels(10, 1);
  labels[0] = 0;
  const auto m = core_metrics(pred, labels, 0.3);
  EXPECT_DOUBLE_EQ(m.bs, 0.9);
  EXPECT_DOUBLE_EQ(m.sb, 0.7);
  EXPECT_DOUBLE_EQ(m.bo, 0.8);
  EXPECT_NEAR(m.os, 0.63, 1e-15);
  EXPECT_EQ(m.sb + m.la, 1.0);
}

TEST(CoreMetricsTest, PerfectModelChanceProbe) {
  const std::vector<int> y{0, 1, 1, 0};
  const auto m = core_metrics(y, y, 0.25);
  EXPECT_EQ(m.bs, 1.0);
  EXPECT_EQ(m.sb, 0.75);
  EXPECT_EQ(m.os, 0.75);
}

TEST(CoreMetricsTest, AllWrongModel) {
  const std::vector<int> pred{1, 1, 1}, labels{0, 0, 0};
  for (double la : {0.0, 0.4, 1.0}) {
    const auto m = core_metrics(pred, labels, la);
    EXPECT_EQ(m.bs, 0.0);
    EXPECT_EQ(m.os, 0.0);
  }
}

TEST(CoreMetricsTest, PairedOverallSuccess) {
  const std::vector<int> pred{0, 1, 1, 0}, labels{0, 1, 0, 0};
  const bool leaked_arr[] = {false, true, false, false};
  const auto m = core_metrics(pred, labels, 0.5, std::span<const bool>(leaked_arr));
  EXPECT_DOUBLE_EQ(m.os, 0.5);  // rows 0 and 3
  EXPECT_THROW(core_metrics({}, {}, 0.5), std::invalid_argument);
  EXPECT_THROW(core_metrics(pred, labels, 1.5), std::invalid_argument);
}

TEST(CoreMetricsTest, PrivacyLensAdapter) {
  const auto m = privacylens_metrics(0.8, 0.25);
  EXPECT_EQ(m.la, 0.25);
  EXPECT_EQ(m.sb, 0.75);
  EXPECT_DOUBLE_EQ(m.os, 0.6);
}

TEST(PrivacyComponentsTest, IntegrityFromPrintedValues) {
  EXPECT_NEAR(privacy_integrity(0.06, 0.49), 0.878, 5e-4);
  EXPECT_NEAR(privacy_integrity(0.14, 1.05), 0.867, 5e-4);
  EXPECT_EQ(privacy_integrity(0.49, 0.49), 0.0);
  EXPECT_EQ(privacy_integrity(0.7, 0.49), 0.0);
  EXPECT_EQ(privacy_integrity(0.0, 0.49), 1.0);
  EXPECT_EQ(privacy_integrity(0.1, std::nullopt), 0.0);
  EXPECT_EQ(privacy_integrity(0.1, 0.0), 0.0);
}

TEST(PariTest, PrintedRowsAndBounds) {
  EXPECT_NEAR(pari(0.95, 0.95, 0.0, 1.0), 0.480, 5e-4);
  EXPECT_NEAR(pari(0.89, 0.95, 0.878, 1.0), 0.901, 5e-5);
  EXPECT_NEAR(pari(1, 1, 1, 1), 1.0, 1e-15);
  PariWeights bad;
  bad.ot = -0.1;
  EXPECT_THROW(pari(1, 1, 1, 1, bad), std::invalid_argument);
}

TEST(PariTest, MonotoneInEachComponent) {
  nn::Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    double c[4] = {u(rng), u(rng), u(rng), u(rng)};
    const double base = pari(c[0], c[1], c[2], c[3]);
    for (int k = 0; k < 4; ++k) {
      double d[4] = {c[0], c[1], c[2], c[3]};
      d[k] = std::min(1.0, d[k] + u(rng) * 0.1);
      EXPECT_GE(pari(d[0], d[1], d[2], d[3]), base);
    }
  }
}

TEST(MiAvgTest, Means) {
  const std::vector<double> one{0.5}, two{0.4, 0.2};
  EXPECT_EQ(mi_avg(one), 0.5);
  EXPECT_NEAR(mi_avg(two), 0.3, 1e-15);
  const auto xor_profile = exact::leakage_profile(exact::xor_pipeline());
  EXPECT_NEAR(mi_avg(xor_profile.local), std::log(2.0) / 2, 1e-12);
  EXPECT_THROW(mi_avg(std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(mi_avg(std::vector<double>{0.1, -0.2}), std::invalid_argument);
}

TEST(MetricsCsvTest, RoundTripAndInvariants) {
  MetricsRecord r;
  r.run_id = "abc123";
  r.agents = 3;
  r.beta = 0.1;
  r.seed = 2;
  r.ce = 0.25;
  r.core = privacylens_metrics(0.9, 0.3);
  r.mi_avg = 0.06;
  r.ot = 0.95;
  finalize_record(r, 0.49);
  EXPECT_EQ(r.rc, r.core.bs);
  EXPECT_EQ(r.rt, 1.0);
  EXPECT_NEAR(r.pari, 0.3 * 0.9 + 0.1 * 0.95 + 0.5 * r.pi + 0.1, 1e-15);
  std::stringstream ss;
  write_metrics_csv(ss, {r});
  const auto back = read_metrics_csv(ss);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].run_id, "abc123");
  EXPECT_EQ(back[0].agents, 3);
  EXPECT_NEAR(back[0].pari, r.pari, 1e-11);
  std::stringstream bad("run_id,N\n");
  EXPECT_THROW(read_metrics_csv(bad), std::runtime_error);
}

TEST(LeakageMarginTest, Normalization) {
  EXPECT_EQ(leakage_margin(0.25, 4), 0.0);
  EXPECT_EQ(leakage_margin(0.1, 4), 0.0);
  EXPECT_DOUBLE_EQ(leakage_margin(1.0, 4), 1.0);
  EXPECT_DOUBLE_EQ(leakage_margin(0.625, 4), 0.5);
}

train::SyntheticTaskSpec TinyTask(std::uint64_t seed) {
  train::SyntheticTaskSpec t;
  t.agents = 1;
  t.train_samples = 1024;
  t.test_samples = 1024;
  t.seed = seed;
  return t;
}

TEST(PipelineEvalTest, StabilityIsOneWithoutNoise) {
  train::SyntheticTask task(TinyTask(0));
  nn::Rng rng(1);
  auto model = train::PipelineModel::initialized(task.spec(), {}, rng);
  EXPECT_EQ(output_stability(model, task.split(train::Split::kTest), 0.0, rng), 1.0);
  const double ot = output_stability(model, task.split(train::Split::kTest), 0.01, rng);
  EXPECT_LT(ot, 1.0);
  EXPECT_GT(ot, 0.9);
}

TEST(PipelineEvalTest, RegularizedRepresentationsLeakLess) {
  double base = 0.0, reg = 0.0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    train::SyntheticTask task(TinyTask(seed));
    train::TrainConfig cfg;
    cfg.iterations = 400;
    cfg.critic.hidden = 32;
    cfg.seed = seed;
    cfg.betas = {0.0};
    auto r0 = train::run_training(task, cfg);
    base += evaluate_pipeline(r0.state.model, r0.state.critics, task, {}).la / 3;
    cfg.betas = {1.0};
    auto r1 = train::run_training(task, cfg);
    const auto e1 = evaluate_pipeline(r1.state.model, r1.state.critics, task, {});
    reg += e1.la / 3;
    EXPECT_EQ(e1.mi.size(), 1u);
  }
  EXPECT_LT(reg, base);
}

}  // namespace
}  // namespace leakchain::eval
