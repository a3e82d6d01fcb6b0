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

#include "certsmooth/calibration.h"

#include <algorithm>
#include <cmath>

#include "certsmooth/error.h"
#include "certsmooth/smoothing.h"
#include "certsmooth/stats.h"

namespace certsmooth {

void ValidateSoftPrediction(std::span<const double> p) {
  Require(p.size() >= 2, "soft prediction needs at least two classes");
  double sum = 0.0;
  for (double v : p) {
    Require(v >= 0.0 && std::isfinite(v), "soft prediction entries must be >= 0");
    sum += v;
  }
  Require(std::fabs(sum - 1.0) <= 1e-9, "soft prediction must sum to 1");
}

BrierResult BrierLoss(std::span<const SoftPrediction> predictions, Label y,
                      double p0) {
  Require(!predictions.empty(), "Brier loss needs at least one prediction");
  const size_t num_classes = predictions.front().size();
  Require(y >= 0 && static_cast<size_t>(y) < num_classes, "label out of range");
  const double m = static_cast<double>(predictions.size());

  BrierResult result;
  for (const SoftPrediction& p : predictions) {
    Require(p.size() == num_classes, "predictions disagree on class count");
    const Label top = ArgMax(std::span<const double>(p));
    const bool keep = top == y || p[top] <= p0;
    result.mask.push_back(keep);
    std::vector<double> grad(num_classes, 0.0);
    if (keep) {
      for (size_t c = 0; c < num_classes; ++c) {
        const double diff = p[c] - (static_cast<Label>(c) == y ? 1.0 : 0.0);
        result.value += diff * diff / m;
        grad[c] = 2.0 * diff / m;
      }
    }
    result.gradient.push_back(std::move(grad));
  }
  return result;
}

AntiConsistencyResult AntiConsistencyLoss(std::span<const double> p1,
                                          std::span<const double> p2,
                                          Label y) {
  Require(p1.size() == p2.size() && p1.size() >= 2,
          "anti-consistency needs two predictions over the same classes");
  Require(y >= 0 && static_cast<size_t>(y) < p1.size(), "label out of range");
  AntiConsistencyResult result;
  result.grad_p1.assign(p1.size(), 0.0);
  result.grad_p2.assign(p2.size(), 0.0);
  const Label top1 = ArgMax(p1);
  result.active = top1 == ArgMax(p2) && top1 != y;
  if (!result.active) return result;
  for (size_t c = 0; c < p2.size(); ++c) {
    result.value += p2[c] * p2[c];
    result.grad_p2[c] = 2.0 * p2[c];
  }
  return result;
}

double TotalObjective(double denoiser_loss, double brier, double anti,
                      double lambda, double alpha_weight) {
  Require(lambda > 0.0, "lambda must be positive");
  Require(alpha_weight >= 0.0, "anti-consistency weight must be >= 0");
  return denoiser_loss + lambda * (brier + alpha_weight * anti);
}

SoftPrediction CleanPriorEnsemble(std::span<const double> clean_logits,
                                  std::span<const double> smoothed_conf,
                                  double beta) {
  Require(clean_logits.size() == smoothed_conf.size() &&
              clean_logits.size() >= 2,
          "logits and smoothed confidences must cover the same classes");
  Require(beta >= 0.0 && beta <= 1.0, "beta must lie in [0, 1]");
  const double log_uniform = -std::log(static_cast<double>(clean_logits.size()));
  std::vector<double> score(clean_logits.size());
  for (size_t c = 0; c < score.size(); ++c) {
    const double prior = std::max(smoothed_conf[c], kProbabilityFloor);
    score[c] = clean_logits[c] + (1.0 - beta) * std::log(prior) +
               beta * log_uniform;
  }
  const double peak = *std::max_element(score.begin(), score.end());
  double total = 0.0;
  for (double& s : score) {
    s = std::exp(s - peak);
    total += s;
  }
  for (double& s : score) s /= total;
  return score;
}

ErrorDecomposition DecomposeErrors(std::span<const ErrorRecord> records,
                                   double p0) {
  Require(!records.empty(), "error decomposition needs at least one record");
  ErrorDecomposition out;
  out.total = static_cast<int64_t>(records.size());
  for (const ErrorRecord& r : records) {
    if (r.correct) continue;
    if (r.confidence <= p0) {
      ++out.over_smoothing_count;
    } else {
      ++out.over_confidence_count;
    }
  }
  const double n = static_cast<double>(out.total);
  out.over_smoothing_rate = static_cast<double>(out.over_smoothing_count) / n;
  out.over_confidence_rate = static_cast<double>(out.over_confidence_count) / n;
  return out;
}

}  // namespace certsmooth
