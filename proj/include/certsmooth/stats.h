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

// Normal-distribution numerics and the confidence-interval procedures used
// by certification. Everything here is pure and reentrant.
//
// Goodman simultaneous bounds (per-class Bonferroni variant):
//
//   A      = chi2_1 quantile at 1 - alpha / K  =  Phi^{-1}(1 - alpha / (2K))^2
//   bounds = (A + 2 n_i -/+ sqrt(A * (A + 4 n_i (n - n_i) / n))) / (2 (n + A))
//
// for K classes, class count n_i and total n.

#ifndef CERTSMOOTH_STATS_H_
#define CERTSMOOTH_STATS_H_

#include <cstdint>
#include <span>
#include <vector>

namespace certsmooth {

// Confidences are clamped into [kProbabilityFloor, 1 - kProbabilityFloor]
// wherever a finite quantile is required.
inline constexpr double kProbabilityFloor = 1e-12;

double ClampProbability(double p);

// Phi(z). Absolute error below 1e-15 on finite inputs.
double NormalCdf(double z);

// Phi^{-1}(p) for 0 < p < 1; throws kDomainError otherwise. Rational
// approximation (Wichura's AS 241) followed by one Newton step through
// NormalCdf.
double NormalQuantile(double p);

// I_x(a, b) for a, b > 0 and x in [0, 1].
double RegularizedIncompleteBeta(double a, double b, double x);

// q-quantile of Beta(a, b) by bisection on RegularizedIncompleteBeta. The
// result is the lower end of the final bracket (width <= 1e-14), so
// I_result(a, b) <= q.
double BetaQuantile(double a, double b, double q);

// One-sided (1 - alpha) lower confidence bound on a binomial proportion:
// the alpha-quantile of Beta(k, n - k + 1), and 0 when k = 0.
double ClopperPearsonLower(int64_t k, int64_t n, double alpha);

struct GoodmanBounds {
  std::vector<double> lower;
  std::vector<double> upper;
};

// Simultaneous (1 - alpha) multinomial bounds for every class.
GoodmanBounds GoodmanInterval(std::span<const int64_t> counts, double alpha);
std::vector<double> GoodmanUpper(std::span<const int64_t> counts, double alpha);

// alpha / tests.
double BonferroniAdjust(double alpha, int64_t tests);

// Exact two-sided binomial test of H0: p = 1/2 for k successes out of n.
double BinomialTwoSidedPValue(int64_t k, int64_t n);

}  // namespace certsmooth

#endif  // CERTSMOOTH_STATS_H_
