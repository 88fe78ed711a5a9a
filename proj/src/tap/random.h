// Copyright 2026 The TAP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TAP_RANDOM_H_
#define TAP_RANDOM_H_

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace tap {

// Seeded generator with portable distributions. The standard library's
// distribution objects are implementation-defined, so every draw here is
// computed from raw 64-bit outputs to keep results identical across
// toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  // SplitMix64 step.
  uint64_t Next();

  // Uniform double in [0, 1) with 53 bits of precision.
  double Uniform();

  // Uniform integer in the closed range [lo, hi]. Rejection sampling keeps
  // the draw unbiased.
  int64_t UniformInt(int64_t lo, int64_t hi);

  // Standard normal via Box-Muller (the second value is cached).
  double Gaussian();

  bool Bernoulli(double p) { return Uniform() < p; }

  template <typename T>
  void Shuffle(std::vector<T> &items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(UniformInt(0, static_cast<int64_t>(i) - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives an independent child seed from a master seed and a label. All
// randomness in an experiment is keyed this way, e.g.
// DeriveSeed(master, "train/shuffle").
uint64_t DeriveSeed(uint64_t master, std::string_view label);

// Same, keyed by an integer index (per-sample generators).
uint64_t DeriveSeed(uint64_t master, uint64_t index);

// 64-bit FNV-1a.
uint64_t Fnv1a(std::string_view bytes);

}  // namespace tap

#endif  // TAP_RANDOM_H_
