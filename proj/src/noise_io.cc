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

#include "certsmooth/noise_io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "certsmooth/error.h"
#include "json.hpp"

namespace certsmooth {
namespace {

struct Header {
  uint32_t magic = 0;
  uint32_t version = 0;
  uint64_t sample_id = 0;
  double sigma = 0.0;
  uint64_t n = 0;
  uint64_t dim = 0;
  uint64_t seed = 0;
  uint64_t checksum = 0;
};

template <typename T>
void PutLittleEndian(std::vector<unsigned char>& out, T value) {
  using Bits = std::conditional_t<sizeof(T) == 4, uint32_t, uint64_t>;
  const Bits bits = std::bit_cast<Bits>(value);
  for (size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
  }
}

template <typename T>
T GetLittleEndian(const unsigned char* in) {
  using Bits = std::conditional_t<sizeof(T) == 4, uint32_t, uint64_t>;
  Bits bits = 0;
  for (size_t i = 0; i < sizeof(T); ++i) {
    bits |= static_cast<Bits>(in[i]) << (8 * i);
  }
  return std::bit_cast<T>(bits);
}

std::vector<unsigned char> EncodeHeader(const Header& h) {
  std::vector<unsigned char> out;
  out.reserve(kHeaderBytes);
  PutLittleEndian(out, h.magic);
  PutLittleEndian(out, h.version);
  PutLittleEndian(out, h.sample_id);
  PutLittleEndian(out, h.sigma);
  PutLittleEndian(out, h.n);
  PutLittleEndian(out, h.dim);
  PutLittleEndian(out, h.seed);
  PutLittleEndian(out, h.checksum);
  return out;
}

Header DecodeHeader(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < kHeaderBytes) {
    Fail(ErrorCode::kProtocol, "file shorter than the protocol header");
  }
  const unsigned char* p = bytes.data();
  Header h;
  h.magic = GetLittleEndian<uint32_t>(p);
  h.version = GetLittleEndian<uint32_t>(p + 4);
  h.sample_id = GetLittleEndian<uint64_t>(p + 8);
  h.sigma = GetLittleEndian<double>(p + 16);
  h.n = GetLittleEndian<uint64_t>(p + 24);
  h.dim = GetLittleEndian<uint64_t>(p + 32);
  h.seed = GetLittleEndian<uint64_t>(p + 40);
  h.checksum = GetLittleEndian<uint64_t>(p + 48);
  return h;
}

std::vector<unsigned char> ReadAll(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteAll(const std::filesystem::path& path,
              const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail(ErrorCode::kIo, "short write to " + path.string());
}

std::filesystem::path SidecarPath(const std::filesystem::path& path) {
  return path.string() + ".json";
}

void WriteFile(const std::filesystem::path& path, uint32_t magic,
               const NoiseBatchSpec& spec, uint64_t dim,
               std::vector<unsigned char> payload) {
  Header h;
  h.magic = magic;
  h.version = kProtocolVersion;
  h.sample_id = spec.sample_id;
  h.sigma = spec.sigma;
  h.n = spec.n;
  h.dim = dim;
  h.seed = spec.seed;
  h.checksum = Fnv1a64(payload);
  std::vector<unsigned char> bytes = EncodeHeader(h);
  bytes.insert(bytes.end(), payload.begin(), payload.end());
  WriteAll(path, bytes);

  nlohmann::ordered_json sidecar = {
      {"magic", magic == kNoiseMagic ? "CSNB" : "CSPD"},
      {"version", h.version},
      {"sample_id", h.sample_id},
      {"sigma", h.sigma},
      {"n", h.n},
      {"dim", h.dim},
      {"seed", h.seed},
      {"checksum", h.checksum},
      {"stream", spec.stream},
  };
  std::ofstream side(SidecarPath(path), std::ios::trunc);
  if (!side) Fail(ErrorCode::kIo, "cannot write sidecar for " + path.string());
  side << sidecar.dump(2) << '\n';
}

}  // namespace

uint64_t Fnv1a64(std::span<const unsigned char> bytes) {
  uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char b : bytes) {
    hash ^= b;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

std::vector<float> NoiseRows(const NoiseBatchSpec& spec,
                             std::span<const double> x) {
  Require(x.size() == spec.dim, "point dimension does not match batch spec");
  Require(spec.sigma >= 0.0, "noise batch sigma must be >= 0");
  const NoiseStream stream(spec.key());
  std::vector<float> rows;
  rows.reserve(spec.n * spec.dim);
  std::vector<double> eps(spec.dim);
  std::vector<double> point(spec.dim);
  for (uint64_t i = 0; i < spec.n; ++i) {
    stream.Fill(i, eps);
    AddScaledNoise(x, spec.sigma, eps, point);
    for (double v : point) rows.push_back(static_cast<float>(v));
  }
  return rows;
}

void EmitNoiseBatch(const NoiseBatchSpec& spec, std::span<const double> x,
                    const std::filesystem::path& path) {
  std::vector<unsigned char> payload;
  const std::vector<float> rows = NoiseRows(spec, x);
  payload.reserve(rows.size() * sizeof(float));
  for (float v : rows) PutLittleEndian(payload, v);
  WriteFile(path, kNoiseMagic, spec, spec.dim, std::move(payload));
}

NoiseBatch ReadNoiseBatch(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = ReadAll(path);
  const Header h = DecodeHeader(bytes);
  if (h.magic != kNoiseMagic) Fail(ErrorCode::kProtocol, "not a noise batch");
  if (h.version != kProtocolVersion) {
    Fail(ErrorCode::kProtocol, "unsupported noise batch version");
  }
  const uint64_t values = h.n * h.dim;
  if (bytes.size() != kHeaderBytes + values * sizeof(float)) {
    Fail(ErrorCode::kProtocol, "noise batch payload size mismatch");
  }
  const std::span<const unsigned char> payload(bytes.data() + kHeaderBytes,
                                               values * sizeof(float));
  if (Fnv1a64(payload) != h.checksum) {
    Fail(ErrorCode::kProtocol, "noise batch checksum mismatch");
  }

  NoiseBatch batch;
  batch.spec.sample_id = h.sample_id;
  batch.spec.sigma = h.sigma;
  batch.spec.n = h.n;
  batch.spec.seed = h.seed;
  batch.spec.dim = static_cast<uint32_t>(h.dim);
  std::ifstream side(SidecarPath(path));
  if (side) {
    try {
      const nlohmann::json doc = nlohmann::json::parse(side);
      batch.spec.stream = doc.value("stream", batch.spec.stream);
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorCode::kProtocol,
           std::string("malformed noise batch sidecar: ") + e.what());
    }
  }
  batch.rows.reserve(values);
  for (uint64_t i = 0; i < values; ++i) {
    batch.rows.push_back(GetLittleEndian<float>(payload.data() + 4 * i));
  }
  return batch;
}

void WritePredictions(const NoiseBatchSpec& spec, std::span<const Label> labels,
                      const std::filesystem::path& path) {
  Require(labels.size() == spec.n, "prediction count must equal batch size");
  std::vector<unsigned char> payload;
  payload.reserve(labels.size() * sizeof(int32_t));
  for (Label l : labels) PutLittleEndian(payload, static_cast<int32_t>(l));
  WriteFile(path, kPredictionMagic, spec, 1, std::move(payload));
}

std::vector<Label> IngestPredictions(const NoiseBatchSpec& spec,
                                     int num_classes,
                                     const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = ReadAll(path);
  const Header h = DecodeHeader(bytes);
  if (h.magic != kPredictionMagic) {
    Fail(ErrorCode::kProtocol, "not a prediction dump");
  }
  if (h.version != kProtocolVersion) {
    Fail(ErrorCode::kProtocol, "unsupported prediction dump version");
  }
  if (h.sample_id != spec.sample_id || h.seed != spec.seed ||
      h.sigma != spec.sigma) {
    Fail(ErrorCode::kProtocol, "prediction dump belongs to a different batch");
  }
  if (h.n != spec.n || bytes.size() != kHeaderBytes + h.n * sizeof(int32_t)) {
    Fail(ErrorCode::kProtocol,
         "prediction count mismatch: expected " + std::to_string(spec.n));
  }
  const std::span<const unsigned char> payload(bytes.data() + kHeaderBytes,
                                               h.n * sizeof(int32_t));
  if (Fnv1a64(payload) != h.checksum) {
    Fail(ErrorCode::kProtocol, "prediction dump checksum mismatch");
  }
  std::vector<Label> labels;
  labels.reserve(h.n);
  for (uint64_t i = 0; i < h.n; ++i) {
    const auto label = GetLittleEndian<int32_t>(payload.data() + 4 * i);
    if (label < 0 || label >= num_classes) {
      Fail(ErrorCode::kProtocol,
           "prediction label " + std::to_string(label) + " out of range");
    }
    labels.push_back(label);
  }
  return labels;
}

}  // namespace certsmooth
