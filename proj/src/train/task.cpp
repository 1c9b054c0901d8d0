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

#include "leakchain/train/task.hpp"

#include <cmath>
#include <stdexcept>

namespace leakchain::train {

namespace {

constexpr std::uint64_t kRuleStream = 1;
constexpr std::uint64_t kTrainStream = 2;
constexpr std::uint64_t kTestStream = 3;

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined input
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void SyntheticTaskSpec::validate() const {
  if (agents < 1) throw std::invalid_argument("task needs at least one agent");
  if (public_dim < 1) throw std::invalid_argument("public_dim must be >= 1");
  if (sensitive_classes < 2) throw std::invalid_argument("sensitive_classes must be >= 2");
  if (label_classes < 2) throw std::invalid_argument("label_classes must be >= 2");
  if (!(sensitive_label_weight >= 0.0 && sensitive_label_weight <= 1.0)) {
    throw std::invalid_argument("sensitive_label_weight must lie in [0, 1]");
  }
  if (train_samples < 2 || test_samples < 2) {
    throw std::invalid_argument("each split needs at least 2 samples");
  }
  if (!(label_noise >= 0.0) || !std::isfinite(label_noise)) {
    throw std::invalid_argument("label_noise must be finite and >= 0");
  }
}

Batch Batch::rows(std::span<const int> index) const {
  Batch out;
  out.public_inputs.reserve(public_inputs.size());
  for (const auto& d : public_inputs) {
    Matrix m(static_cast<Eigen::Index>(index.size()), d.cols());
    for (std::size_t r = 0; r < index.size(); ++r) m.row(r) = d.row(index[r]);
    out.public_inputs.push_back(std::move(m));
  }
  for (const auto& s : sensitive) {
    std::vector<int> v(index.size());
    for (std::size_t r = 0; r < index.size(); ++r) v[r] = s[index[r]];
    out.sensitive.push_back(std::move(v));
  }
  out.labels.resize(index.size());
  for (std::size_t r = 0; r < index.size(); ++r) out.labels[r] = labels[index[r]];
  return out;
}

SyntheticTask::SyntheticTask(const SyntheticTaskSpec& spec) : spec_(spec) {
  spec_.validate();
  Rng rule_rng(stream_seed(spec_.seed, kRuleStream));
  std::normal_distribution<double> g;
  rule_ = Matrix::NullaryExpr(spec_.agents * spec_.public_dim, spec_.label_classes,
                              [&] { return g(rule_rng); });
  Rng train_rng(stream_seed(spec_.seed, kTrainStream));
  train_ = gen_batch(spec_.train_samples, train_rng);
  Rng test_rng(stream_seed(spec_.seed, kTestStream));
  test_ = gen_batch(spec_.test_samples, test_rng);
}

Batch SyntheticTask::gen_batch(int count, Rng& rng) const {
  if (count < 1) throw std::invalid_argument("batch size must be >= 1");
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> s_dist(0, spec_.sensitive_classes - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Batch b;
  for (int i = 0; i < spec_.agents; ++i) {
    b.public_inputs.push_back(
        Matrix::NullaryExpr(count, spec_.public_dim, [&] { return g(rng); }));
  }
  for (int i = 0; i < spec_.agents; ++i) {
    std::vector<int> s(static_cast<std::size_t>(count));
    for (int& v : s) v = s_dist(rng);
    b.sensitive.push_back(std::move(s));
  }
  Matrix all(count, spec_.agents * spec_.public_dim);
  for (int i = 0; i < spec_.agents; ++i) {
    all.middleCols(i * spec_.public_dim, spec_.public_dim) = b.public_inputs[i];
  }
  Matrix scores = all * rule_ / std::sqrt(static_cast<double>(all.cols()));
  scores += Matrix::NullaryExpr(count, spec_.label_classes,
                                [&] { return spec_.label_noise * g(rng); });
  b.labels.resize(static_cast<std::size_t>(count));
  for (int r = 0; r < count; ++r) {
    Eigen::Index best = 0;
    scores.row(r).maxCoeff(&best);
    // The coin is drawn for every row so the stream does not depend on w.
    const bool from_sensitive = u(rng) < spec_.sensitive_label_weight;
    b.labels[r] = from_sensitive ? b.sensitive[0][r] % spec_.label_classes
                                 : static_cast<int>(best);
  }
  return b;
}

Batch SyntheticTask::sample(Split which, int count, Rng& rng) const {
  const Batch& src = split(which);
  std::uniform_int_distribution<int> pick(0, src.size() - 1);
  std::vector<int> index(static_cast<std::size_t>(count));
  for (int& v : index) v = pick(rng);
  return src.rows(index);
}

}  // namespace leakchain::train
