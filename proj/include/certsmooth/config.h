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

// Run configuration shared by the command-line subcommands.
//
// JSON form (all keys optional except "schema"):
//
//   {"schema": "certsmooth.run_config/1", "method": "cascade",
//    "sigmas": [0.25, 0.5, 1.0], "p0": 0.5, "alpha": 0.001, "n": 10000,
//    "n0": 100, "seed": 0, "classifier": "clf.json", "dataset": "data.json",
//    "out": "out", "epsilon_grid": {"start": 0, "stop": 2, "step": 0.01},
//    "focal": {"sigma0": 1.0, "sigma1": 0.5},
//    "losses": {"lambda": 0.01, "alpha_w": 1.0, "beta": 0.1},
//    "threads": 0, "timing": false}

#ifndef CERTSMOOTH_CONFIG_H_
#define CERTSMOOTH_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "certsmooth/calibration.h"
#include "certsmooth/harness.h"
#include "json.hpp"

namespace certsmooth {

inline constexpr const char* kRunConfigSchema = "certsmooth.run_config/1";

struct RunConfig {
  Method method = Method::kCascade;
  std::vector<double> sigmas = {0.25, 0.5, 1.0};
  double p0 = 0.5;
  double alpha = 0.001;
  int64_t n = 10000;
  int64_t n0 = 100;
  uint64_t seed = 0;
  std::string classifier_path;  // empty: nearest centroid of the dataset
  std::string dataset_path;     // empty: DefaultMixture()
  std::string out_dir = "out";
  EpsilonGrid grid;
  double focal_sigma0 = 1.0;
  double focal_sigma1 = 0.5;
  double lambda = kDefaultLambda;
  double alpha_weight = kDefaultAlphaWeight;
  double prior_beta = kDefaultPriorBeta;
  int threads = 0;  // 0: OpenMP default
  bool timing = false;

  // Throws kInvalidArgument.
  void Validate() const;
  BatchConfig ToBatchConfig() const;
};

// Missing keys keep their defaults; unknown keys and a wrong or absent schema
// are rejected.
RunConfig RunConfigFromJson(const nlohmann::json& doc);
RunConfig LoadRunConfig(const std::filesystem::path& path);
nlohmann::ordered_json RunConfigToJson(const RunConfig& config);

}  // namespace certsmooth

#endif  // CERTSMOOTH_CONFIG_H_
