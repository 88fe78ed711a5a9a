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

#include <cmath>
#include <map>

#include "gtest/gtest.h"
#include "tap/random.h"

namespace tap {
namespace {

TEST(Rng, SplitMixReferenceOutputs) {
  Rng rng(0);
  EXPECT_EQ(rng.Next(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(rng.Next(), 0x6e789e6aa1b965f4ULL);
}

TEST(Rng, Fnv1aReferenceValues) {
  EXPECT_EQ(Fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Rng, DerivedSeedsDiffer) {
  EXPECT_NE(DeriveSeed(1, "a"), DeriveSeed(1, "b"));
  EXPECT_NE(DeriveSeed(1, "a"), DeriveSeed(2, "a"));
  EXPECT_NE(DeriveSeed(1, uint64_t{0}), DeriveSeed(1, uint64_t{1}));
  EXPECT_EQ(DeriveSeed(9, "train/shuffle"), DeriveSeed(9, "train/shuffle"));
}

TEST(Rng, UniformIntIsUnbiased) {
  Rng rng(3);
  std::map<int64_t, int> counts;
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++counts[rng.UniformInt(-3, 3)];
  ASSERT_EQ(counts.size(), 7u);
  double chi2 = 0.0;
  for (const auto &[value, c] : counts) {
    const double e = n / 7.0;
    chi2 += (c - e) * (c - e) / e;
  }
  EXPECT_LT(chi2, 22.46);  // 6 dof, p = 0.001
  EXPECT_EQ(rng.UniformInt(5, 5), 5);
}

TEST(Rng, GaussianMoments) {
  Rng rng(4);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.Gaussian();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.01);
}

TEST(Rng, ShuffleIsAPermutation) {
  Rng rng(5);
  std::vector<int> v(100);
  for (int i = 0; i < 100; ++i) v[i] = i;
  rng.Shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_NE(v, sorted);
}

}  // namespace
}  // namespace tap
