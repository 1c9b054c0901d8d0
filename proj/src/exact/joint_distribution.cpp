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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace leakchain::exact {

namespace {

std::size_t TableSize(const std::vector<Variable>& variables) {
  std::size_t n = 1;
  for (const auto& v : variables) n *= static_cast<std::size_t>(v.size);
  return n;
}

std::string Join(std::span<const std::string> names) {
  std::ostringstream os;
  for (std::size_t i = 0; i < names.size(); ++i) os << (i ? "," : "") << names[i];
  return os.str();
}

}  // namespace

JointDistribution::JointDistribution(std::vector<Variable> variables,
                                     std::vector<double> probs)
    : variables_(std::move(variables)), probs_(std::move(probs)) {
  std::set<std::string> seen;
  for (const auto& v : variables_) {
    if (v.size < 1) {
      throw ConstructionError("variable '" + v.name + "' has empty alphabet");
    }
    if (!seen.insert(v.name).second) {
      throw ConstructionError("duplicate variable name '" + v.name + "'");
    }
  }
  if (probs_.size() != TableSize(variables_)) {
    throw ConstructionError("probability table has " +
                            std::to_string(probs_.size()) + " entries, expected " +
                            std::to_string(TableSize(variables_)));
  }
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ConstructionError("probability entries must be finite and >= 0");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os << "total probability mass " << total << " differs from 1";
    throw ConstructionError(os.str());
  }
}

JointDistribution::JointDistribution(Unchecked, std::vector<Variable> variables,
                                     std::vector<double> probs)
    : variables_(std::move(variables)), probs_(std::move(probs)) {}

bool JointDistribution::contains(std::string_view name) const {
  return std::any_of(variables_.begin(), variables_.end(),
                     [&](const Variable& v) { return v.name == name; });
}

std::size_t JointDistribution::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i].name == name) return i;
  }
  throw std::invalid_argument("unknown variable '" + std::string(name) + "'");
}

double JointDistribution::prob(std::span<const int> symbols) const {
  if (symbols.size() != variables_.size()) {
    throw std::invalid_argument("assignment arity does not match variables");
  }
  std::size_t index = 0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (symbols[i] < 0 || symbols[i] >= variables_[i].size) {
      throw std::out_of_range("symbol out of range for '" + variables_[i].name + "'");
    }
    index = index * variables_[i].size + symbols[i];
  }
  return probs_[index];
}

std::vector<std::size_t> JointDistribution::IndicesOf(
    std::span<const std::string> names) const {
  std::vector<std::size_t> out;
  out.reserve(names.size());
  for (const auto& n : names) {
    std::size_t idx = index_of(n);
    if (std::find(out.begin(), out.end(), idx) != out.end()) {
      throw std::invalid_argument("variable '" + n + "' listed twice");
    }
    out.push_back(idx);
  }
  return out;
}

std::vector<double> JointDistribution::MarginalTable(
    std::span<const std::size_t> keep) const {
  const std::size_t nvars = variables_.size();
  // Destination stride of each source variable; zero when summed out.
  std::vector<std::size_t> dest_stride(nvars, 0);
  std::size_t out_size = 1;
  for (std::size_t k = keep.size(); k-- > 0;) {
    dest_stride[keep[k]] = out_size;
    out_size *= static_cast<std::size_t>(variables_[keep[k]].size);
  }
  std::vector<double> out(out_size, 0.0);
  if (nvars == 0) {
    out[0] = probs_.empty() ? 0.0 : probs_[0];
    return out;
  }

  std::vector<int> symbol(nvars, 0);
  std::size_t dest = 0;
  const std::size_t last = nvars - 1;
  for (std::size_t src = 0; src < probs_.size(); ++src) {
    out[dest] += probs_[src];
    // Odometer increment, last variable fastest.
    std::size_t v = last;
    while (true) {
      ++symbol[v];
      dest += dest_stride[v];
      if (symbol[v] < variables_[v].size) break;
      dest -= dest_stride[v] * static_cast<std::size_t>(symbol[v]);
      symbol[v] = 0;
      if (v == 0) break;
      --v;
    }
  }
  return out;
}

JointDistribution JointDistribution::marginal(
    std::span<const std::string> names) const {
  auto keep = IndicesOf(names);
  std::vector<Variable> vars;
  vars.reserve(keep.size());
  for (auto k : keep) vars.push_back(variables_[k]);
  return JointDistribution(Unchecked{}, std::move(vars), MarginalTable(keep));
}

double JointDistribution::entropy(std::span<const std::string> names) const {
  auto table = MarginalTable(IndicesOf(names));
  double h = 0.0;
  for (double p : table) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double raw_mutual_information(const JointDistribution& joint, const NameSet& x,
                              const NameSet& y, const NameSet& z) {
  if (x.empty() || y.empty()) {
    throw std::invalid_argument("mutual information needs nonempty X and Y");
  }
  NameSet all;
  all.insert(all.end(), x.begin(), x.end());
  all.insert(all.end(), y.begin(), y.end());
  all.insert(all.end(), z.begin(), z.end());
  std::set<std::string> unique(all.begin(), all.end());
  if (unique.size() != all.size()) {
    throw std::invalid_argument("X, Y, Z must be disjoint: {" + Join(all) + "}");
  }
  for (const auto& n : all) joint.index_of(n);

  auto group_size = [&](const NameSet& names) {
    std::size_t n = 1;
    for (const auto& name : names) {
      n *= static_cast<std::size_t>(joint.variables()[joint.index_of(name)].size);
    }
    return n;
  };
  const std::size_t nx = group_size(x), ny = group_size(y), nz = group_size(z);

  const auto xyz = joint.marginal(all);
  const auto p = xyz.probs();
  std::vector<double> pxz(nx * nz, 0.0), pyz(ny * nz, 0.0), pz(nz, 0.0);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t k = 0; k < nz; ++k) {
        const double v = p[(i * ny + j) * nz + k];
        pxz[i * nz + k] += v;
        pyz[j * nz + k] += v;
        pz[k] += v;
      }
    }
  }

  // Cells with zero mass contribute nothing (0 log 0 = 0).
  double mi = 0.0;
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t k = 0; k < nz; ++k) {
        const double v = p[(i * ny + j) * nz + k];
        if (v <= 0.0) continue;
        mi += v * std::log(v * pz[k] / (pxz[i * nz + k] * pyz[j * nz + k]));
      }
    }
  }
  return mi;
}

double mutual_information(const JointDistribution& joint, const NameSet& x,
                          const NameSet& y, const NameSet& z) {
  const double raw = raw_mutual_information(joint, x, y, z);
  if (raw < -kInfoFloor) {
    std::ostringstream os;
    os << "negative mutual information " << raw << " for I(" << Join(x) << ";"
       << Join(y) << "|" << Join(z) << ")";
    throw std::logic_error(os.str());
  }
  return std::max(raw, 0.0);
}

}  // namespace leakchain::exact
