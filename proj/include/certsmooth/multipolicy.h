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

// Two aggregation policies over several smoothing scales that need every
// scale's confidence: the max-radius policy and focal smoothing.

#ifndef CERTSMOOTH_MULTIPOLICY_H_
#define CERTSMOOTH_MULTIPOLICY_H_

#include <cstdint>
#include <span>
#include <vector>

#include "certsmooth/classifier.h"
#include "certsmooth/philox.h"

namespace certsmooth {

// ---------------------------------------------------------------------------
// Max-radius policy.
//
// Answers with the scale maximizing sigma_i * Phi^{-1}(top confidence) and
// certifies half the gap between that score and the best competitor score
// over all scales and classes.

struct MaxRadiusResult {
  Label prediction = kAbstain;
  double radius = 0.0;
  int chosen_scale = -1;
};

// confidences[i][c] for scale i and class c. Winners may be lower bounds and
// competitors upper bounds; rows may then sum to more than 1.
MaxRadiusResult MaxRadiusPolicy(
    std::span<const std::vector<double>> confidences,
    std::span<const double> sigmas);

// Split form for estimated confidences: the score of scale i uses
// lower[i][top_i] and the competitor term uses upper[i][y].
MaxRadiusResult MaxRadiusPolicy(std::span<const std::vector<double>> lower,
                                std::span<const std::vector<double>> upper,
                                std::span<const double> sigmas);

// Bounds from per-scale vote histograms: Clopper-Pearson lower bounds for
// each scale's top class and Goodman upper bounds for all classes, each of
// the 2K intervals at level alpha / (2K).
MaxRadiusResult MaxRadiusFromCounts(
    std::span<const std::vector<int64_t>> counts,
    std::span<const double> sigmas, double alpha);

// ---------------------------------------------------------------------------
// Focal smoothing.
//
// Noise sigma_0 everywhere except on a mask M, where it is sigma_1 < sigma_0.
// With K disjoint masks and per-mask confidences p_k, the averaged confidence
// stays above 1/2 within radius
//
//   min_b R_b,   R_b = (1/K) sum_k a_k / sqrt(t^2 b_k + 1),   b on the simplex,
//
// where a_k = sigma_0 Phi^{-1}(p_k) and t^2 = sigma_0^2 / sigma_1^2 - 1.

struct FocalInstance {
  std::vector<double> a;  // a_k >= 0
  double t_sq = 0.0;
  double sigma0 = 0.0;
  double sigma1 = 0.0;

  // a_k from per-mask confidences; p_k <= 1/2 contributes a_k = 0.
  static FocalInstance FromConfidences(std::span<const double> p,
                                       double sigma0, double sigma1);
  // Direct (a, t^2) form used by the optimizer tests and the CLI.
  static FocalInstance FromMargins(std::vector<double> a, double t_sq);
};

struct FocalSolution {
  std::vector<double> b;
  double radius = 0.0;
  double shared_budget = 0.0;  // common b of the max-a indices
};

inline constexpr double kFocalGridStep = 1e-4;
inline constexpr double kFocalTolerance = 5e-4;

double FocalRadius(std::span<const double> b, const FocalInstance& inst);

// Budget allocation implied by the stationarity conditions for a shared
// budget B on the max-a indices: zero where a_k <= a_max / (t^2 B + 1)^{3/2},
// else (1/t^2)((a_k / a_max)^{2/3} (t^2 B + 1) - 1).
std::vector<double> FocalAllocation(const FocalInstance& inst,
                                    double shared_budget);

// One-dimensional grid over the shared budget in (0, 1], keeping grid points
// whose allocation sums to 1 within tol and returning the one with the
// smallest radius (smallest budget on ties). The winner is then polished by
// bisection on the budget so the allocation sums to 1 to machine precision.
// Throws kNoFeasiblePoint when no grid point passes the tolerance check.
FocalSolution FocalOptimize(const FocalInstance& inst,
                            double grid_step = kFocalGridStep,
                            double tol = kFocalTolerance);

struct FocalCertificate {
  bool abstained = true;
  double mean_confidence = 0.0;
  double radius = 0.0;
  FocalSolution solution;
};

FocalCertificate FocalCertify(std::span<const double> per_mask_confidences,
                              double sigma0, double sigma1,
                              double grid_step = kFocalGridStep,
                              double tol = kFocalTolerance);

// Sampled variant: p_k are Clopper-Pearson lower bounds at alpha / K from
// counts[k] successes out of n.
FocalCertificate FocalCertifyFromCounts(std::span<const int64_t> successes,
                                        int64_t n, double alpha, double sigma0,
                                        double sigma1);

// Pairwise-disjoint binary masks over `dim` coordinates.
class FocalMaskSet {
 public:
  // Throws kInvalidArgument if masks overlap or have the wrong length.
  FocalMaskSet(int dim, std::vector<std::vector<uint8_t>> masks);

  // One mask per coordinate.
  static FocalMaskSet Coordinates(int dim);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(masks_.size()); }
  const std::vector<uint8_t>& mask(int k) const { return masks_[k]; }

  // x + (sigma0 (1 - M_k) + sigma1 M_k) * eps.
  void Corrupt(int k, std::span<const double> x, double sigma0, double sigma1,
               std::span<const double> eps, std::span<double> out) const;

 private:
  int dim_;
  std::vector<std::vector<uint8_t>> masks_;
};

// Votes of the base classifier under mask k's anisotropic noise.
std::vector<int64_t> FocalVotes(const Classifier& classifier,
                                std::span<const double> x,
                                const FocalMaskSet& masks, int k,
                                double sigma0, double sigma1, int64_t n,
                                const NoiseKey& key);

}  // namespace certsmooth

#endif  // CERTSMOOTH_MULTIPOLICY_H_
