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

#include "certsmooth/cascade.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "certsmooth/error.h"
#include "certsmooth/stats.h"

namespace certsmooth {
namespace {

void ValidateSigmas(std::span<const double> sigmas) {
  Require(!sigmas.empty(), "cascade needs at least one sigma");
  for (size_t i = 0; i < sigmas.size(); ++i) {
    Require(sigmas[i] > 0.0 && std::isfinite(sigmas[i]),
            "cascade sigmas must be positive");
    if (i > 0) {
      Require(sigmas[i] > sigmas[i - 1],
              "cascade sigmas must be strictly increasing");
    }
  }
}

}  // namespace

void CascadeConfig::Validate() const {
  ValidateSigmas(sigmas);
  Require(p0 >= 0.5 && p0 < 1.0, "p0 must lie in [0.5, 1)");
  Require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  Require(n >= 1 && n0 >= 1, "cascade needs n >= 1 and n0 >= 1");
}

double CascadeTrace::halt_sigma() const {
  for (const StageRecord& s : stages) {
    if (s.decision == StageDecision::kHalt) return s.sigma;
  }
  return 0.0;
}

double CascadeTrace::SpentAlpha() const {
  if (abstained()) return 0.0;
  double spent = 0.0;
  for (const StageRecord& s : stages) {
    spent += s.decision == StageDecision::kHalt ? s.test_alpha : s.bound_alpha;
  }
  return spent;
}

double CascadeRadius(double halt_sigma, double p_lower, Label prediction,
                     std::span<const LaterStageBounds> later, double p0) {
  double radius = ThresholdRadius(halt_sigma, p_lower, p0);
  const double threshold = NormalQuantile(p0);
  for (const LaterStageBounds& stage : later) {
    for (size_t y = 0; y < stage.upper.size(); ++y) {
      if (static_cast<Label>(y) == prediction) continue;
      const double term =
          stage.sigma *
          (threshold - NormalQuantile(ClampProbability(stage.upper[y])));
      radius = std::min(radius, term);
    }
  }
  return std::max(radius, 0.0);
}

CascadeTrace CascadePredictCertify(const Classifier& classifier,
                                   std::span<const double> x,
                                   const CascadeConfig& config,
                                   uint64_t sample_id) {
  config.Validate();
  const int num_stages = static_cast<int>(config.sigmas.size());
  CascadeTrace trace;
  for (int position = 1; position <= num_stages; ++position) {
    const int stage = num_stages - position;
    StageRecord record;
    record.stage = stage;
    record.position = position;
    record.sigma = config.sigmas[stage];
    record.test_alpha = BonferroniAdjust(config.alpha, position);
    const CertifyParams params{record.sigma, config.n0, config.n,
                               record.test_alpha, config.p0};
    record.certification =
        Certify(classifier, x, params, config.seed, sample_id,
                static_cast<uint32_t>(stage));
    const bool halt = !record.certification.abstained();
    record.decision = halt ? StageDecision::kHalt : StageDecision::kProceed;
    trace.stages.push_back(std::move(record));
    if (halt) break;
  }

  const StageRecord& last = trace.stages.back();
  if (last.decision != StageDecision::kHalt) return trace;

  trace.prediction = last.certification.prediction;
  trace.halt_stage = last.stage;
  const double bound_alpha = BonferroniAdjust(config.alpha, last.position);
  std::vector<LaterStageBounds> later;
  for (StageRecord& s : trace.stages) {
    if (s.decision == StageDecision::kHalt) continue;
    s.bound_alpha = bound_alpha;
    s.goodman_upper =
        GoodmanUpper(s.certification.estimation.counts, bound_alpha);
    later.push_back({s.sigma, s.goodman_upper});
  }
  trace.radius = CascadeRadius(last.sigma, last.certification.p_lower,
                               trace.prediction, later, config.p0);
  return trace;
}

ExactCascadeResult CascadeCertifyExact(const Classifier& classifier,
                                       std::span<const double> x,
                                       std::span<const double> sigmas,
                                       double p0) {
  ValidateSigmas(sigmas);
  Require(p0 >= 0.5 && p0 < 1.0, "p0 must lie in [0.5, 1)");
  ExactCascadeResult result;
  std::vector<LaterStageBounds> later;
  for (int stage = static_cast<int>(sigmas.size()) - 1; stage >= 0; --stage) {
    std::vector<double> conf = classifier.ExactConfidences(x, sigmas[stage]);
    const Label top = ArgMax(std::span<const double>(conf));
    result.confidences.push_back(conf);
    if (conf[top] > p0) {
      result.prediction = top;
      result.halt_stage = stage;
      result.radius = CascadeRadius(sigmas[stage], conf[top], top, later, p0);
      return result;
    }
    later.push_back({sigmas[stage], std::move(conf)});
  }
  return result;
}

Label CascadeDecideExact(const Classifier& classifier,
                         std::span<const double> x,
                         std::span<const double> sigmas, double p0) {
  for (size_t i = sigmas.size(); i-- > 0;) {
    const std::vector<double> conf = classifier.ExactConfidences(x, sigmas[i]);
    const Label top = ArgMax(std::span<const double>(conf));
    if (conf[top] > p0) return top;
  }
  return kAbstain;
}

nlohmann::ordered_json CascadeTraceToJson(const CascadeTrace& trace) {
  nlohmann::ordered_json stages = nlohmann::ordered_json::array();
  for (const StageRecord& s : trace.stages) {
    const CertificationResult& c = s.certification;
    nlohmann::ordered_json stage = {
        {"stage", s.stage},
        {"position", s.position},
        {"sigma", s.sigma},
        {"test_alpha", s.test_alpha},
        {"guess", c.guess},
        {"selection_counts", c.selection.counts},
        {"estimation_counts", c.estimation.counts},
        {"p_lower", c.p_lower},
        {"decision", s.decision == StageDecision::kHalt ? "halt" : "proceed"},
    };
    if (!s.goodman_upper.empty()) {
      stage["bound_alpha"] = s.bound_alpha;
      stage["goodman_upper"] = s.goodman_upper;
    }
    stages.push_back(std::move(stage));
  }
  nlohmann::ordered_json out = {
      {"schema", "certsmooth.cascade_trace/1"},
      {"prediction", trace.abstained() ? nlohmann::ordered_json("abstain")
                                       : nlohmann::ordered_json(trace.prediction)},
      {"radius", trace.radius},
      {"halt_stage", trace.halt_stage ? nlohmann::ordered_json(*trace.halt_stage)
                                      : nlohmann::ordered_json(nullptr)},
      {"spent_alpha", trace.SpentAlpha()},
      {"stages", std::move(stages)},
  };
  return out;
}

}  // namespace certsmooth
