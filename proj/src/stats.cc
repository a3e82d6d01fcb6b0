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

#include "certsmooth/stats.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "certsmooth/error.h"

namespace certsmooth {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

double NormalPdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// AS 241 (PPND16) for the lower tail, p <= 0.5.
double QuantileApproximation(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
                 67265.770927008700853) * r +
                45921.953931549871457) * r +
               13731.693765509461125) * r +
              1971.5909503065514427) * r +
             133.14166789178437745) * r +
            3.387132872796366608) /
           (((((((r * 5226.495278852545925 + 28729.085735721942674) * r +
                 39307.89580009271061) * r +
                21213.794301586595867) * r +
               5394.1960214247511077) * r +
              687.1870074920579083) * r +
             42.313330701600911252) * r +
            1.0);
  }
  double r = std::sqrt(-std::log(p));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r +
                  0.24178072517745061177) * r +
                 1.27045825245236838258) * r +
                3.64784832476320460504) * r +
               5.7694972214606914055) * r +
              4.6303378461565452959) * r +
             1.42343711074968357734) /
            (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                  0.0151986665636164571966) * r +
                 0.14810397642748007459) * r +
                0.68976733498510000455) * r +
               1.6763848301838038494) * r +
              2.05319162663775882187) * r +
             1.0);
  } else {
    r -= 5.0;
    value = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                  0.0012426609473880784386) * r +
                 0.026532189526576123093) * r +
                0.29656057182850489123) * r +
               1.7848265399172913358) * r +
              5.4637849111641143699) * r +
             6.6579046435011037772) /
            (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                  1.8463183175100546818e-5) * r +
                 7.868691311456132591e-4) * r +
                0.0148753612908506148525) * r +
               0.13692988092273580531) * r +
              0.59983220655588793769) * r +
             1.0);
  }
  return -value;
}

// Continued fraction for I_x(a, b) (modified Lentz), valid for
// x < (a + 1) / (a + b + 2).
double BetaContinuedFraction(double a, double b, double x) {
  constexpr int kMaxIterations = 20000;
  constexpr double kEpsilon = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEpsilon) break;
  }
  return h;
}

void RequireAlpha(double alpha) {
  Require(alpha > 0.0 && alpha < 1.0,
          "significance level must lie in (0, 1), got " + std::to_string(alpha));
}

}  // namespace

double ClampProbability(double p) {
  return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
}

double NormalCdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double NormalQuantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    Fail(ErrorCode::kDomainError,
         "normal quantile requires 0 < p < 1, got " + std::to_string(p));
  }
  if (p == 0.5) return 0.0;
  // Work in the lower tail; 1 - p is exact for p >= 0.5.
  const bool upper = p > 0.5;
  const double tail = upper ? 1.0 - p : p;
  double x = QuantileApproximation(tail);
  x -= (NormalCdf(x) - tail) / NormalPdf(x);
  return upper ? -x : x;
}

double RegularizedIncompleteBeta(double a, double b, double x) {
  Require(a > 0.0 && b > 0.0, "incomplete beta requires a, b > 0");
  Require(x >= 0.0 && x <= 1.0, "incomplete beta requires x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * BetaContinuedFraction(a, b, x) / a;
  }
  return 1.0 - std::exp(log_front) * BetaContinuedFraction(b, a, 1.0 - x) / b;
}

double BetaQuantile(double a, double b, double q) {
  Require(q >= 0.0 && q <= 1.0, "beta quantile requires q in [0, 1]");
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (RegularizedIncompleteBeta(a, b, mid) <= q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double ClopperPearsonLower(int64_t k, int64_t n, double alpha) {
  RequireAlpha(alpha);
  Require(n >= 1, "Clopper-Pearson requires n >= 1");
  Require(k >= 0 && k <= n,
          "Clopper-Pearson requires 0 <= k <= n, got k=" + std::to_string(k) +
              " n=" + std::to_string(n));
  if (k == 0) return 0.0;
  return BetaQuantile(static_cast<double>(k), static_cast<double>(n - k + 1),
                      alpha);
}

GoodmanBounds GoodmanInterval(std::span<const int64_t> counts, double alpha) {
  RequireAlpha(alpha);
  Require(counts.size() >= 2, "Goodman bounds require at least two classes");
  int64_t total = 0;
  for (int64_t c : counts) {
    Require(c >= 0, "Goodman bounds require nonnegative counts");
    total += c;
  }
  Require(total >= 1, "Goodman bounds require at least one observation");

  const double num_classes = static_cast<double>(counts.size());
  const double z = NormalQuantile(alpha / (2.0 * num_classes));
  const double chi2 = z * z;
  const double n = static_cast<double>(total);

  GoodmanBounds bounds;
  bounds.lower.reserve(counts.size());
  bounds.upper.reserve(counts.size());
  for (int64_t c : counts) {
    const double ni = static_cast<double>(c);
    const double spread = std::sqrt(chi2 * (chi2 + 4.0 * ni * (n - ni) / n));
    const double denom = 2.0 * (n + chi2);
    bounds.lower.push_back(std::max(0.0, (chi2 + 2.0 * ni - spread) / denom));
    bounds.upper.push_back(std::min(1.0, (chi2 + 2.0 * ni + spread) / denom));
  }
  return bounds;
}

std::vector<double> GoodmanUpper(std::span<const int64_t> counts,
                                 double alpha) {
  return GoodmanInterval(counts, alpha).upper;
}

double BonferroniAdjust(double alpha, int64_t tests) {
  RequireAlpha(alpha);
  Require(tests >= 1, "Bonferroni correction requires at least one test");
  return alpha / static_cast<double>(tests);
}

double BinomialTwoSidedPValue(int64_t k, int64_t n) {
  Require(n >= 1 && k >= 0 && k <= n, "binomial test requires 0 <= k <= n");
  const int64_t m = std::min(k, n - k);
  if (2 * m == n) return 1.0;
  // P[X <= m] for X ~ Bin(n, 1/2).
  const double tail = RegularizedIncompleteBeta(
      static_cast<double>(n - m), static_cast<double>(m + 1), 0.5);
  return std::min(1.0, 2.0 * tail);
}

}  // namespace certsmooth
