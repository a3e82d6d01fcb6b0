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

// Counter-based Gaussian noise. Every noise vector is a pure function of
// (seed, sample id, stream tag, draw index), so draws can be evaluated in any
// order or on any thread and still reproduce bit-for-bit.

#ifndef CERTSMOOTH_PHILOX_H_
#define CERTSMOOTH_PHILOX_H_

#include <array>
#include <cstdint>
#include <span>

namespace certsmooth {

// Philox-4x32 with 10 rounds (Salmon et al., SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<uint32_t, 4>;
  using Key = std::array<uint32_t, 2>;

  explicit Philox4x32(Key key) : key_(key) {}

  Counter operator()(Counter counter) const;

 private:
  Key key_;
};

uint64_t SplitMix64(uint64_t x);

// Sub-seed for a named stream. Distinct tags give statistically independent
// streams from one user seed.
uint64_t DeriveSubSeed(uint64_t seed, uint32_t stream_tag);

enum class Phase : uint32_t {
  kSelect = 1,    // n0 draws that pick the candidate class
  kEstimate = 2,  // n draws that bound its probability
  kFocal = 3,
};

// Stream tag for one phase of one smoothing stage.
constexpr uint32_t StreamTag(uint32_t stage, Phase phase) {
  return (stage << 4) | static_cast<uint32_t>(phase);
}

struct NoiseKey {
  uint64_t seed = 0;
  uint64_t sample_id = 0;
  uint32_t stream = StreamTag(0, Phase::kEstimate);
};

// Standard normal draws for one key. Draw `index` fills out[0..dim) with
// independent N(0, 1) values via Box-Muller on 53-bit uniforms.
class NoiseStream {
 public:
  explicit NoiseStream(const NoiseKey& key);

  void Fill(uint64_t index, std::span<double> out) const;

 private:
  Philox4x32 philox_;
  uint32_t sample_word_;
};

// out = x + sigma * eps. Every consumer of noisy points goes through this one
// out-of-line routine so in-process and emitted points round identically.
void AddScaledNoise(std::span<const double> x, double sigma,
                    std::span<const double> eps, std::span<double> out);

}  // namespace certsmooth

#endif  // CERTSMOOTH_PHILOX_H_
