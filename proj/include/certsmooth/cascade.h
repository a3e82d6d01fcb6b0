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

// Cascaded smoothing over scales sigma_1 < ... < sigma_K.
//
// The cascade queries the largest scale first and answers with the first
// stage whose confidence exceeds p0; if none does it abstains. When it halts
// at stage k with class y, the prediction is constant on the ball of radius
//
//   R = min{ sigma_k (Phi^{-1}(p_k,y) - Phi^{-1}(p0)),
//            min_{k' > k, y' != y} sigma_k' (Phi^{-1}(p0) - Phi^{-1}(p_k',y')) }
//
// clamped at 0: stage k must keep its answer, and no earlier-queried
// (larger-scale) stage may start answering with another class. With Monte
// Carlo estimates, p_k,y is replaced by a Clopper-Pearson lower bound and
// p_k',y' by Goodman upper bounds.
//
// Significance: the stage at query position j (1 = largest scale) tests at
// alpha / j. If the cascade halts at position J, the Goodman bounds of the
// J - 1 earlier stages are computed at alpha / J from the histograms already
// drawn, so the certificate rests on J bounds at alpha / J each.

#ifndef CERTSMOOTH_CASCADE_H_
#define CERTSMOOTH_CASCADE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "certsmooth/classifier.h"
#include "certsmooth/smoothing.h"
#include "json.hpp"

namespace certsmooth {

struct CascadeConfig {
  std::vector<double> sigmas;  // strictly increasing
  double p0 = 0.5;
  double alpha = 0.001;
  int64_t n = 10000;
  int64_t n0 = 100;
  uint64_t seed = 0;

  // Throws kInvalidArgument.
  void Validate() const;
};

enum class StageDecision { kProceed, kHalt };

struct StageRecord {
  int stage = 0;       // index into sigmas
  int position = 0;    // 1-based query order
  double sigma = 0.0;
  double test_alpha = 0.0;  // level of the Clopper-Pearson test
  CertificationResult certification;
  StageDecision decision = StageDecision::kProceed;
  // Filled for proceeding stages once the cascade halts.
  double bound_alpha = 0.0;
  std::vector<double> goodman_upper;
};

struct CascadeTrace {
  std::vector<StageRecord> stages;  // in query order, largest sigma first
  Label prediction = kAbstain;
  double radius = 0.0;
  std::optional<int> halt_stage;  // index into sigmas

  bool abstained() const { return prediction == kAbstain; }
  double halt_sigma() const;

  // Sum of significance levels the certificate depends on.
  double SpentAlpha() const;
};

// Upper bounds of one proceeding stage, as seen by the radius formula.
struct LaterStageBounds {
  double sigma = 0.0;
  std::vector<double> upper;  // per class
};

// The radius formula above with explicit bounds; clamped at 0.
double CascadeRadius(double halt_sigma, double p_lower, Label prediction,
                     std::span<const LaterStageBounds> later, double p0);

CascadeTrace CascadePredictCertify(const Classifier& classifier,
                                   std::span<const double> x,
                                   const CascadeConfig& config,
                                   uint64_t sample_id = 0);

struct ExactCascadeResult {
  Label prediction = kAbstain;
  double radius = 0.0;
  std::optional<int> halt_stage;
  std::vector<std::vector<double>> confidences;  // per queried stage
};

// The same pipeline on exact smoothed confidences (no sampling).
ExactCascadeResult CascadeCertifyExact(const Classifier& classifier,
                                       std::span<const double> x,
                                       std::span<const double> sigmas,
                                       double p0);

// Only the decision of CascadeCertifyExact, for dense neighborhood checks.
Label CascadeDecideExact(const Classifier& classifier,
                         std::span<const double> x,
                         std::span<const double> sigmas, double p0);

nlohmann::ordered_json CascadeTraceToJson(const CascadeTrace& trace);

}  // namespace certsmooth

#endif  // CERTSMOOTH_CASCADE_H_
