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

#include "leakchain/nn/checkpoint.hpp"

#include <iomanip>
#include <string>

namespace leakchain::nn {

void save_mlp(std::ostream& os, const Mlp& net) {
  const auto flags = os.flags();
  const auto precision = os.precision();
  os << std::setprecision(17);
  os << "leakchain-mlp " << kCheckpointVersion << '\n';
  os << "layers " << net.depth() << '\n';
  for (const auto& d : net.layers()) {
    os << "dense " << d.input_dim() << ' ' << d.output_dim() << '\n';
    for (Eigen::Index r = 0; r < d.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < d.weight.cols(); ++c) {
        os << (c ? " " : "") << d.weight(r, c);
      }
      os << '\n';
    }
    for (Eigen::Index c = 0; c < d.bias.size(); ++c) os << (c ? " " : "") << d.bias(c);
    os << '\n';
  }
  os.flags(flags);
  os.precision(precision);
}

Mlp load_mlp(std::istream& is) {
  auto expect = [&](const std::string& word) {
    std::string got;
    if (!(is >> got) || got != word) {
      throw CheckpointError("checkpoint: expected '" + word + "', got '" + got + "'");
    }
  };
  auto read_int = [&](const char* what) {
    long v = 0;
    if (!(is >> v) || v < 0) throw CheckpointError(std::string("checkpoint: bad ") + what);
    return v;
  };
  auto read_double = [&] {
    double v = 0;
    if (!(is >> v)) throw CheckpointError("checkpoint: truncated parameter data");
    return v;
  };

  expect("leakchain-mlp");
  if (read_int("version") != kCheckpointVersion) {
    throw CheckpointError("checkpoint: unsupported version");
  }
  expect("layers");
  const long depth = read_int("layer count");
  std::vector<Dense> layers;
  for (long l = 0; l < depth; ++l) {
    expect("dense");
    const long in = read_int("input width");
    const long out = read_int("output width");
    Dense d{Matrix(in, out), RowVector(out)};
    for (long r = 0; r < in; ++r) {
      for (long c = 0; c < out; ++c) d.weight(r, c) = read_double();
    }
    for (long c = 0; c < out; ++c) d.bias(c) = read_double();
    layers.push_back(std::move(d));
  }
  try {
    return Mlp(std::move(layers));
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
}

}  // namespace leakchain::nn
