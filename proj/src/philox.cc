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
#include <numbers>

namespace certsmooth {
namespace {

constexpr uint32_t kPhiloxW32A = 0x9E3779B9;
constexpr uint32_t kPhiloxW32B = 0xBB67AE85;
constexpr uint32_t kPhiloxM4x32A = 0xD2511F53;
constexpr uint32_t kPhiloxM4x32B = 0xCD9E8D57;

inline void MultiplyHighLow(uint32_t a, uint32_t b, uint32_t& low,
                            uint32_t& high) {
  const uint64_t product = static_cast<uint64_t>(a) * b;
  low = static_cast<uint32_t>(product);
  high = static_cast<uint32_t>(product >> 32);
}

// Uniform on (0, 1] from 64 random bits.
inline double OpenUnit(uint32_t hi, uint32_t lo) {
  const uint64_t bits = (static_cast<uint64_t>(hi) << 32) | lo;
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::operator()(Counter counter) const {
  Key key = key_;
  for (int round = 0; round < 10; ++round) {
    uint32_t lo0, hi0, lo1, hi1;
    MultiplyHighLow(kPhiloxM4x32A, counter[0], lo0, hi0);
    MultiplyHighLow(kPhiloxM4x32B, counter[2], lo1, hi1);
    counter = {hi1 ^ counter[1] ^ key[0], lo1, hi0 ^ counter[3] ^ key[1], lo0};
    key[0] += kPhiloxW32A;
    key[1] += kPhiloxW32B;
  }
  return counter;
}

uint64_t SplitMix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

uint64_t DeriveSubSeed(uint64_t seed, uint32_t stream_tag) {
  return SplitMix64(SplitMix64(seed) ^ SplitMix64(0xC3A5C85C97CB3127ULL +
                                                  stream_tag));
}

NoiseStream::NoiseStream(const NoiseKey& key)
    : philox_([&key] {
        // High sample-id bits are folded into the key; the low 32 bits ride
        // in the counter.
        const uint64_t sub =
            DeriveSubSeed(key.seed ^ SplitMix64(key.sample_id >> 32),
                          key.stream);
        return Philox4x32::Key{static_cast<uint32_t>(sub),
                               static_cast<uint32_t>(sub >> 32)};
      }()),
      sample_word_(static_cast<uint32_t>(key.sample_id)) {}

void NoiseStream::Fill(uint64_t index, std::span<double> out) const {
  const uint32_t index_lo = static_cast<uint32_t>(index);
  const uint32_t index_hi = static_cast<uint32_t>(index >> 32);
  for (size_t block = 0; 2 * block < out.size(); ++block) {
    const Philox4x32::Counter bits =
        philox_({index_lo, index_hi, static_cast<uint32_t>(block),
                 sample_word_});
    const double u1 = OpenUnit(bits[0], bits[1]);
    const double u2 = OpenUnit(bits[2], bits[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[2 * block] = radius * std::cos(angle);
    if (2 * block + 1 < out.size()) out[2 * block + 1] = radius * std::sin(angle);
  }
}

void AddScaledNoise(std::span<const double> x, double sigma,
                    std::span<const double> eps, std::span<double> out) {
  for (size_t d = 0; d < x.size(); ++d) out[d] = x[d] + sigma * eps[d];
}

}  // namespace certsmooth
