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

#include "certsmooth/multipolicy.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "certsmooth/error.h"
#include "certsmooth/smoothing.h"
#include "certsmooth/stats.h"

namespace certsmooth {
namespace {

double Score(double sigma, double p) {
  return sigma * NormalQuantile(ClampProbability(p));
}

double AllocationSum(const FocalInstance& inst, double shared_budget) {
  const std::vector<double> b = FocalAllocation(inst, shared_budget);
  return std::accumulate(b.begin(), b.end(), 0.0);
}

}  // namespace

// ---------------------------------------------------------------------------
// Max-radius policy

MaxRadiusResult MaxRadiusPolicy(std::span<const std::vector<double>> lower,
                                std::span<const std::vector<double>> upper,
                                std::span<const double> sigmas) {
  const size_t num_scales = sigmas.size();
  Require(num_scales >= 1, "max-radius policy needs at least one scale");
  Require(lower.size() == num_scales && upper.size() == num_scales,
          "confidence rows must match the number of scales");
  const size_t num_classes = lower.front().size();
  Require(num_classes >= 2, "max-radius policy needs at least two classes");
  for (size_t i = 0; i < num_scales; ++i) {
    Require(lower[i].size() == num_classes && upper[i].size() == num_classes,
            "confidence rows must share one class count");
    Require(sigmas[i] > 0.0 && (i == 0 || sigmas[i] > sigmas[i - 1]),
            "sigmas must be positive and strictly increasing");
  }

  MaxRadiusResult result;
  double best_score = -std::numeric_limits<double>::infinity();
  Label best_class = 0;
  for (size_t i = 0; i < num_scales; ++i) {
    const Label top = ArgMax(std::span<const double>(lower[i]));
    const double score = Score(sigmas[i], lower[i][top]);
    if (score > best_score) {
      best_score = score;
      best_class = top;
      result.chosen_scale = static_cast<int>(i);
    }
  }
  if (lower[result.chosen_scale][best_class] <= 0.5) return result;

  double competitor = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < num_scales; ++i) {
    for (size_t y = 0; y < num_classes; ++y) {
      if (static_cast<Label>(y) == best_class) continue;
      competitor = std::max(competitor, Score(sigmas[i], upper[i][y]));
    }
  }
  result.prediction = best_class;
  result.radius = std::max(0.0, 0.5 * (best_score - competitor));
  return result;
}

MaxRadiusResult MaxRadiusPolicy(
    std::span<const std::vector<double>> confidences,
    std::span<const double> sigmas) {
  return MaxRadiusPolicy(confidences, confidences, sigmas);
}

MaxRadiusResult MaxRadiusFromCounts(
    std::span<const std::vector<int64_t>> counts,
    std::span<const double> sigmas, double alpha) {
  Require(counts.size() == sigmas.size(),
          "one vote histogram per scale is required");
  const double level = alpha / (2.0 * static_cast<double>(sigmas.size()));
  std::vector<std::vector<double>> lower;
  std::vector<std::vector<double>> upper;
  for (const auto& row : counts) {
    const int64_t n = std::accumulate(row.begin(), row.end(), int64_t{0});
    const Label top = ArgMax(std::span<const int64_t>(row));
    std::vector<double> lo(row.size(), 0.0);
    lo[top] = ClopperPearsonLower(row[top], n, level);
    lower.push_back(std::move(lo));
    upper.push_back(GoodmanUpper(row, level));
  }
  return MaxRadiusPolicy(lower, upper, sigmas);
}

// ---------------------------------------------------------------------------
// Focal smoothing

FocalInstance FocalInstance::FromConfidences(std::span<const double> p,
                                             double sigma0, double sigma1) {
  Require(!p.empty(), "focal smoothing needs at least one mask");
  Require(sigma0 > sigma1 && sigma1 > 0.0,
          "focal smoothing needs sigma0 > sigma1 > 0");
  FocalInstance inst;
  inst.sigma0 = sigma0;
  inst.sigma1 = sigma1;
  inst.t_sq = sigma0 * sigma0 / (sigma1 * sigma1) - 1.0;
  for (double pk : p) {
    Require(pk >= 0.0 && pk <= 1.0, "per-mask confidence outside [0, 1]");
    inst.a.push_back(pk > 0.5 ? Score(sigma0, pk) : 0.0);
  }
  return inst;
}

FocalInstance FocalInstance::FromMargins(std::vector<double> a, double t_sq) {
  FocalInstance inst;
  inst.a = std::move(a);
  inst.t_sq = t_sq;
  return inst;
}

double FocalRadius(std::span<const double> b, const FocalInstance& inst) {
  Require(b.size() == inst.a.size(), "budget vector has the wrong length");
  double sum = 0.0;
  for (size_t k = 0; k < b.size(); ++k) {
    sum += inst.a[k] / std::sqrt(inst.t_sq * b[k] + 1.0);
  }
  return sum / static_cast<double>(b.size());
}

std::vector<double> FocalAllocation(const FocalInstance& inst,
                                    double shared_budget) {
  const double a_max = *std::max_element(inst.a.begin(), inst.a.end());
  const double scale = inst.t_sq * shared_budget + 1.0;
  std::vector<double> b(inst.a.size());
  for (size_t k = 0; k < inst.a.size(); ++k) {
    if (inst.a[k] == a_max) {
      b[k] = shared_budget;
    } else if (inst.a[k] <= a_max / std::pow(scale, 1.5)) {
      b[k] = 0.0;
    } else {
      b[k] = (std::pow(inst.a[k] / a_max, 2.0 / 3.0) * scale - 1.0) /
             inst.t_sq;
    }
  }
  return b;
}

FocalSolution FocalOptimize(const FocalInstance& inst, double grid_step,
                            double tol) {
  const size_t num_masks = inst.a.size();
  Require(num_masks >= 1, "focal optimization needs at least one mask");
  Require(inst.t_sq > 0.0 && std::isfinite(inst.t_sq),
          "focal optimization needs t^2 > 0");
  for (double a : inst.a) {
    Require(a >= 0.0 && std::isfinite(a), "focal margins must be finite, >= 0");
  }
  Require(grid_step > 0.0 && grid_step <= 0.1, "grid step must lie in (0, 0.1]");
  Require(tol > 0.0, "tolerance must be positive");

  const double a_max = *std::max_element(inst.a.begin(), inst.a.end());
  FocalSolution best;
  if (a_max == 0.0) {
    // No certifiable margin anywhere; every allocation gives radius 0.
    best.b.assign(num_masks, 1.0 / static_cast<double>(num_masks));
    best.shared_budget = best.b.front();
    best.radius = 0.0;
    return best;
  }

  const auto steps = static_cast<int64_t>(std::floor(1.0 / grid_step + 1e-9));
  double best_radius = std::numeric_limits<double>::infinity();
  for (int64_t g = 1; g <= steps + 1; ++g) {
    const double budget = g <= steps ? static_cast<double>(g) * grid_step : 1.0;
    if (g == steps + 1 && static_cast<double>(steps) * grid_step >= 1.0) break;
    std::vector<double> b = FocalAllocation(inst, budget);
    const double sum = std::accumulate(b.begin(), b.end(), 0.0);
    if (std::fabs(sum - 1.0) > tol) continue;
    const double radius = FocalRadius(b, inst);
    if (radius < best_radius) {
      best_radius = radius;
      best.b = std::move(b);
      best.shared_budget = budget;
    }
  }
  if (best.b.empty()) {
    Fail(ErrorCode::kNoFeasiblePoint,
         "no grid point satisfies the simplex constraint; loosen tol or "
         "refine grid_step");
  }

  // The allocation sum is continuous and increasing in the shared budget, so
  // bisection pins the exactly feasible budget near the grid winner.
  const double max_count = static_cast<double>(
      std::count(inst.a.begin(), inst.a.end(), a_max));
  double lo = std::max(0.0, best.shared_budget - grid_step);
  double hi = std::min(1.0 / max_count, best.shared_budget + grid_step);
  if (AllocationSum(inst, lo) > 1.0) lo = 0.0;
  if (AllocationSum(inst, hi) < 1.0) hi = 1.0 / max_count;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (AllocationSum(inst, mid) < 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double budget = 0.5 * (lo + hi);
  std::vector<double> b = FocalAllocation(inst, budget);
  const double sum = std::accumulate(b.begin(), b.end(), 0.0);
  for (double& v : b) v /= sum;
  best.shared_budget = b[std::distance(
      inst.a.begin(), std::max_element(inst.a.begin(), inst.a.end()))];
  best.radius = FocalRadius(b, inst);
  best.b = std::move(b);
  return best;
}

FocalCertificate FocalCertify(std::span<const double> per_mask_confidences,
                              double sigma0, double sigma1, double grid_step,
                              double tol) {
  const FocalInstance inst =
      FocalInstance::FromConfidences(per_mask_confidences, sigma0, sigma1);
  FocalCertificate cert;
  cert.mean_confidence =
      std::accumulate(per_mask_confidences.begin(),
                      per_mask_confidences.end(), 0.0) /
      static_cast<double>(per_mask_confidences.size());
  if (cert.mean_confidence <= 0.5) return cert;
  cert.abstained = false;
  cert.solution = FocalOptimize(inst, grid_step, tol);
  cert.radius = cert.solution.radius;
  return cert;
}

FocalCertificate FocalCertifyFromCounts(std::span<const int64_t> successes,
                                        int64_t n, double alpha, double sigma0,
                                        double sigma1) {
  Require(!successes.empty(), "focal smoothing needs at least one mask");
  const double level = alpha / static_cast<double>(successes.size());
  std::vector<double> p;
  p.reserve(successes.size());
  for (int64_t s : successes) p.push_back(ClopperPearsonLower(s, n, level));
  return FocalCertify(p, sigma0, sigma1);
}

// ---------------------------------------------------------------------------
// Masks

FocalMaskSet::FocalMaskSet(int dim, std::vector<std::vector<uint8_t>> masks)
    : dim_(dim), masks_(std::move(masks)) {
  Require(dim_ >= 1, "mask dimension must be >= 1");
  Require(!masks_.empty(), "focal smoothing needs at least one mask");
  std::vector<uint8_t> covered(dim_, 0);
  for (const auto& m : masks_) {
    Require(static_cast<int>(m.size()) == dim_, "mask has the wrong length");
    for (int d = 0; d < dim_; ++d) {
      Require(m[d] <= 1, "masks must be binary");
      Require(!(m[d] && covered[d]), "focal masks must be pairwise disjoint");
      covered[d] |= m[d];
    }
  }
}

FocalMaskSet FocalMaskSet::Coordinates(int dim) {
  std::vector<std::vector<uint8_t>> masks(dim, std::vector<uint8_t>(dim, 0));
  for (int d = 0; d < dim; ++d) masks[d][d] = 1;
  return FocalMaskSet(dim, std::move(masks));
}

void FocalMaskSet::Corrupt(int k, std::span<const double> x, double sigma0,
                           double sigma1, std::span<const double> eps,
                           std::span<double> out) const {
  const std::vector<uint8_t>& m = masks_.at(k);
  for (int d = 0; d < dim_; ++d) {
    out[d] = x[d] + (m[d] ? sigma1 : sigma0) * eps[d];
  }
}

std::vector<int64_t> FocalVotes(const Classifier& classifier,
                                std::span<const double> x,
                                const FocalMaskSet& masks, int k,
                                double sigma0, double sigma1, int64_t n,
                                const NoiseKey& key) {
  Require(masks.dim() == classifier.dim() &&
              static_cast<int>(x.size()) == classifier.dim(),
          "mask, point and classifier dimensions must agree");
  Require(n >= 1, "need at least one noise draw");
  const NoiseStream stream(key);
  std::vector<int64_t> counts(classifier.num_classes(), 0);
  std::vector<double> eps(x.size());
  std::vector<double> point(x.size());
  for (int64_t i = 0; i < n; ++i) {
    stream.Fill(static_cast<uint64_t>(i), eps);
    masks.Corrupt(k, x, sigma0, sigma1, eps, point);
    ++counts[classifier.Classify(point)];
  }
  return counts;
}

}  // namespace certsmooth
