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

// Calibration losses for denoiser fine-tuning, evaluated as plain
// value-and-gradient functions of the classifier's soft predictions, plus the
// clean-prior ensemble and the over-smoothing / over-confidence split.

#ifndef CERTSMOOTH_CALIBRATION_H_
#define CERTSMOOTH_CALIBRATION_H_

#include <cstdint>
#include <span>
#include <vector>

#include "certsmooth/classifier.h"

namespace certsmooth {

inline constexpr double kDefaultLambda = 0.01;
inline constexpr double kDefaultAlphaWeight = 1.0;
inline constexpr double kDefaultPriorBeta = 0.1;

using SoftPrediction = std::vector<double>;

// Throws kInvalidArgument unless p is a distribution (sum 1 within 1e-9).
void ValidateSoftPrediction(std::span<const double> p);

struct BrierResult {
  double value = 0.0;
  std::vector<std::vector<double>> gradient;  // m x C
  std::vector<bool> mask;
};

// Mean over the m noisy predictions of mask * |p - e_y|^2, where a
// prediction is masked out when it is wrong and its top probability exceeds
// p0.
BrierResult BrierLoss(std::span<const SoftPrediction> predictions, Label y,
                      double p0);

struct AntiConsistencyResult {
  double value = 0.0;
  std::vector<double> grad_p1;  // identically zero (stop-gradient)
  std::vector<double> grad_p2;
  bool active = false;
};

// Active when both predictions agree on a wrong class; then the value is
// |p2|^2 (the |p1 - sg(p1)|^2 term is zero with zero gradient).
AntiConsistencyResult AntiConsistencyLoss(std::span<const double> p1,
                                          std::span<const double> p2, Label y);

double TotalObjective(double denoiser_loss, double brier, double anti,
                      double lambda = kDefaultLambda,
                      double alpha_weight = kDefaultAlphaWeight);

// normalize(exp(logits + (1 - beta) log p_smooth + beta log(1 / C))) with
// p_smooth floored at 1e-12.
SoftPrediction CleanPriorEnsemble(std::span<const double> clean_logits,
                                  std::span<const double> smoothed_conf,
                                  double beta = kDefaultPriorBeta);

struct ErrorRecord {
  bool correct = false;
  double confidence = 0.0;
};

struct ErrorDecomposition {
  int64_t total = 0;
  int64_t over_smoothing_count = 0;   // wrong with p <= p0
  int64_t over_confidence_count = 0;  // wrong with p > p0
  double over_smoothing_rate = 0.0;
  double over_confidence_rate = 0.0;

  int64_t error_count() const {
    return over_smoothing_count + over_confidence_count;
  }
};

ErrorDecomposition DecomposeErrors(std::span<const ErrorRecord> records,
                                   double p0);

}  // namespace certsmooth

#endif  // CERTSMOOTH_CALIBRATION_H_
