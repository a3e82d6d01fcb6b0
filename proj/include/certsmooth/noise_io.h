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

// File protocol for classifiers that live outside this process.
//
// A noise batch holds the n noisy copies x + sigma * eps_i of one input as a
// little-endian float32 row-major n x dim matrix after a 56-byte header:
//
//   offset  type     field
//        0  u32      magic      "CSNB" (0x424E5343)
//        4  u32      version    1
//        8  u64      sample_id
//       16  f64      sigma
//       24  u64      n
//       32  u64      dim
//       40  u64      seed
//       48  u64      checksum   FNV-1a 64 of the payload bytes
//
// A JSON sidecar (<file>.json) mirrors the header and also records the noise
// stream tag. The external model answers with a prediction dump: the same
// header with magic "CSPD" (0x44505343) and dim = 1, followed by n int32
// labels in row order.

#ifndef CERTSMOOTH_NOISE_IO_H_
#define CERTSMOOTH_NOISE_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "certsmooth/classifier.h"
#include "certsmooth/philox.h"

namespace certsmooth {

inline constexpr uint32_t kNoiseMagic = 0x424E5343;       // "CSNB"
inline constexpr uint32_t kPredictionMagic = 0x44505343;  // "CSPD"
inline constexpr uint32_t kProtocolVersion = 1;
inline constexpr size_t kHeaderBytes = 56;

struct NoiseBatchSpec {
  uint64_t sample_id = 0;
  double sigma = 0.0;
  uint64_t n = 0;
  uint64_t seed = 0;
  uint32_t dim = 0;
  uint32_t stream = StreamTag(0, Phase::kEstimate);

  NoiseKey key() const { return {seed, sample_id, stream}; }
};

struct NoiseBatch {
  NoiseBatchSpec spec;
  std::vector<float> rows;  // n x dim
};

uint64_t Fnv1a64(std::span<const unsigned char> bytes);

// The rows an emitted batch contains, without touching the filesystem.
std::vector<float> NoiseRows(const NoiseBatchSpec& spec,
                             std::span<const double> x);

// Writes `path` and `path`.json. Re-invocation is bit-identical.
void EmitNoiseBatch(const NoiseBatchSpec& spec, std::span<const double> x,
                    const std::filesystem::path& path);

NoiseBatch ReadNoiseBatch(const std::filesystem::path& path);

void WritePredictions(const NoiseBatchSpec& spec, std::span<const Label> labels,
                      const std::filesystem::path& path);

// Labels aligned with the emitted noise order. Throws kProtocol on header or
// count mismatch, out-of-range labels or a bad checksum.
std::vector<Label> IngestPredictions(const NoiseBatchSpec& spec,
                                     int num_classes,
                                     const std::filesystem::path& path);

}  // namespace certsmooth

#endif  // CERTSMOOTH_NOISE_IO_H_
