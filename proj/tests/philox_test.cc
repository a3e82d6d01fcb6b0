// Copyright 2026 The CertSmooth Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "certsmooth/philox.h"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

namespace certsmooth {
namespace {

// Known-answer vectors from the Random123 distribution (philox4x32_10).
TEST(PhiloxTest, KnownAnswerZero) {
  const Philox4x32 gen({0, 0});
  const auto out = gen({0, 0, 0, 0});
  EXPECT_EQ(out, (Philox4x32::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c,
                                      0x9b00dbd8}));
}

TEST(PhiloxTest, KnownAnswerOnes) {
  const Philox4x32 gen({0xffffffff, 0xffffffff});
  const auto out = gen({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff});
  EXPECT_EQ(out, (Philox4x32::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6,
                                      0x6d5451fd}));
}

TEST(PhiloxTest, KnownAnswerPi) {
  const Philox4x32 gen({0xa4093822, 0x299f31d0});
  const auto out = gen({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344});
  EXPECT_EQ(out, (Philox4x32::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420,
                                      0x24126ea1}));
}

TEST(NoiseStreamTest, PureFunctionOfKeyAndIndex) {
  const NoiseKey key{42, 7, StreamTag(1, Phase::kEstimate)};
  std::vector<double> a(5), b(5);
  NoiseStream(key).Fill(123, a);
  // Evaluate other indices in between; the draw must not depend on order.
  NoiseStream other(key);
  std::vector<double> scratch(5);
  other.Fill(9, scratch);
  other.Fill(123, b);
  EXPECT_EQ(a, b);
}

TEST(NoiseStreamTest, DistinctKeysGiveDistinctDraws) {
  std::vector<double> base(3), v(3);
  NoiseStream({1, 0, StreamTag(0, Phase::kEstimate)}).Fill(0, base);
  NoiseStream({2, 0, StreamTag(0, Phase::kEstimate)}).Fill(0, v);
  EXPECT_NE(base, v);
  NoiseStream({1, 1, StreamTag(0, Phase::kEstimate)}).Fill(0, v);
  EXPECT_NE(base, v);
  NoiseStream({1, 0, StreamTag(0, Phase::kSelect)}).Fill(0, v);
  EXPECT_NE(base, v);
  NoiseStream({1, 0, StreamTag(1, Phase::kEstimate)}).Fill(0, v);
  EXPECT_NE(base, v);
  NoiseStream({1, uint64_t{1} << 32, StreamTag(0, Phase::kEstimate)}).Fill(0, v);
  EXPECT_NE(base, v);
}

TEST(NoiseStreamTest, MomentsAreStandardNormal) {
  const NoiseStream stream({5, 0, StreamTag(0, Phase::kEstimate)});
  const int n = 200000;
  std::vector<double> v(3);
  double sum = 0.0, sum2 = 0.0, tail = 0.0;
  for (int i = 0; i < n; ++i) {
    stream.Fill(i, v);
    for (double x : v) {
      sum += x;
      sum2 += x * x;
      if (x > 1.0) tail += 1.0;
    }
  }
  const double m = 3.0 * n;
  EXPECT_NEAR(sum / m, 0.0, 5.0 / std::sqrt(m));
  EXPECT_NEAR(sum2 / m, 1.0, 5.0 * std::sqrt(2.0 / m));
  // P[Z > 1] = 0.158655...
  EXPECT_NEAR(tail / m, 0.15865525393145707, 5.0 * std::sqrt(0.134 / m));
}

TEST(StreamTagTest, Layout) {
  EXPECT_EQ(StreamTag(0, Phase::kSelect), 1u);
  EXPECT_EQ(StreamTag(2, Phase::kEstimate), 0x22u);
  EXPECT_NE(DeriveSubSeed(1, StreamTag(0, Phase::kSelect)),
            DeriveSubSeed(1, StreamTag(0, Phase::kEstimate)));
}

TEST(AddScaledNoiseTest, ZeroSigmaKeepsPoint) {
  const std::vector<double> x = {0.25, -3.0};
  const std::vector<double> eps = {1.5, -0.7};
  std::vector<double> out(2);
  AddScaledNoise(x, 0.0, eps, out);
  EXPECT_EQ(out, x);
  AddScaledNoise(x, 2.0, eps, out);
  EXPECT_DOUBLE_EQ(out[0], 3.25);
  EXPECT_DOUBLE_EQ(out[1], -4.4);
}

}  // namespace
}  // namespace certsmooth
