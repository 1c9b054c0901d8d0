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

#ifndef LEAKCHAIN_NN_CHECKPOINT_HPP_
#define LEAKCHAIN_NN_CHECKPOINT_HPP_

#include <istream>
#include <ostream>
#include <stdexcept>

#include "leakchain/nn/mlp.hpp"

namespace leakchain::nn {

// Text layout, whitespace separated, values printed with 17 significant
// digits so that a reload is bit-exact:
//
//   leakchain-mlp 1
//   layers <L>
//   dense <in> <out>          (repeated L times, followed by)
//   <in rows of out weights>  row-major, row r = input unit r
//   <out biases>
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kCheckpointVersion = 1;

void save_mlp(std::ostream& os, const Mlp& net);
Mlp load_mlp(std::istream& is);

}  // namespace leakchain::nn

#endif  // LEAKCHAIN_NN_CHECKPOINT_HPP_
