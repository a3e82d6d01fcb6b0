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

#include "certsmooth/config.h"

#include <fstream>
#include <set>

#include "certsmooth/error.h"

namespace certsmooth {

void RunConfig::Validate() const {
  ToBatchConfig().Validate();
  Require(lambda > 0.0, "lambda must be positive");
  Require(alpha_weight >= 0.0, "alpha_w must be >= 0");
  Require(prior_beta >= 0.0 && prior_beta <= 1.0, "beta must lie in [0, 1]");
  Require(threads >= 0, "threads must be >= 0");
  Require(!out_dir.empty(), "output directory must not be empty");
}

BatchConfig RunConfig::ToBatchConfig() const {
  BatchConfig b;
  b.method = method;
  b.sigmas = sigmas;
  b.p0 = p0;
  b.alpha = alpha;
  b.n = n;
  b.n0 = n0;
  b.seed = seed;
  b.grid = grid;
  b.focal_sigma0 = focal_sigma0;
  b.focal_sigma1 = focal_sigma1;
  b.record_timing = timing;
  return b;
}

RunConfig RunConfigFromJson(const nlohmann::json& doc) {
  Require(doc.is_object(), "run config must be a JSON object");
  static const std::set<std::string> kKeys = {
      "schema", "method", "sigmas",  "p0",      "alpha",        "n",
      "n0",     "seed",   "classifier", "dataset", "out",       "epsilon_grid",
      "focal",  "losses", "threads", "timing"};
  for (const auto& item : doc.items()) {
    Require(kKeys.count(item.key()) == 1,
            "unknown run config key '" + item.key() + "'");
  }
  Require(doc.contains("schema") && doc["schema"] == kRunConfigSchema,
          std::string("run config schema must be ") + kRunConfigSchema);
  RunConfig c;
  try {
    if (doc.contains("method")) c.method = ParseMethod(doc["method"].get<std::string>());
    c.sigmas = doc.value("sigmas", c.sigmas);
    c.p0 = doc.value("p0", c.p0);
    c.alpha = doc.value("alpha", c.alpha);
    c.n = doc.value("n", c.n);
    c.n0 = doc.value("n0", c.n0);
    c.seed = doc.value("seed", c.seed);
    c.classifier_path = doc.value("classifier", c.classifier_path);
    c.dataset_path = doc.value("dataset", c.dataset_path);
    c.out_dir = doc.value("out", c.out_dir);
    if (doc.contains("epsilon_grid")) {
      const auto& g = doc["epsilon_grid"];
      c.grid.start = g.value("start", c.grid.start);
      c.grid.stop = g.value("stop", c.grid.stop);
      c.grid.step = g.value("step", c.grid.step);
    }
    if (doc.contains("focal")) {
      const auto& f = doc["focal"];
      c.focal_sigma0 = f.value("sigma0", c.focal_sigma0);
      c.focal_sigma1 = f.value("sigma1", c.focal_sigma1);
    }
    if (doc.contains("losses")) {
      const auto& l = doc["losses"];
      c.lambda = l.value("lambda", c.lambda);
      c.alpha_weight = l.value("alpha_w", c.alpha_weight);
      c.prior_beta = l.value("beta", c.prior_beta);
    }
    c.threads = doc.value("threads", c.threads);
    c.timing = doc.value("timing", c.timing);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kInvalidArgument, std::string("bad run config: ") + e.what());
  }
  return c;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kInvalidArgument,
         "config " + path.string() + " is not valid JSON: " + e.what());
  }
  return RunConfigFromJson(doc);
}

nlohmann::ordered_json RunConfigToJson(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["schema"] = kRunConfigSchema;
  j["method"] = MethodName(c.method);
  j["sigmas"] = c.sigmas;
  j["p0"] = c.p0;
  j["alpha"] = c.alpha;
  j["n"] = c.n;
  j["n0"] = c.n0;
  j["seed"] = c.seed;
  j["classifier"] = c.classifier_path;
  j["dataset"] = c.dataset_path;
  j["out"] = c.out_dir;
  j["epsilon_grid"] = {{"start", c.grid.start},
                       {"stop", c.grid.stop},
                       {"step", c.grid.step}};
  j["focal"] = {{"sigma0", c.focal_sigma0}, {"sigma1", c.focal_sigma1}};
  j["losses"] = {{"lambda", c.lambda},
                 {"alpha_w", c.alpha_weight},
                 {"beta", c.prior_beta}};
  j["threads"] = c.threads;
  j["timing"] = c.timing;
  return j;
}

}  // namespace certsmooth
