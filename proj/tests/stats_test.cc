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

#include <cmath>
#include <random>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <gtest/gtest.h>

#include "certsmooth/error.h"

namespace certsmooth {
namespace {

const boost::math::normal kStdNormal;

TEST(NormalCdfTest, KnownValues) {
  EXPECT_EQ(NormalCdf(0.0), 0.5);
  EXPECT_NEAR(NormalCdf(1.0), 0.8413447460685429, 1e-15);
  EXPECT_NEAR(NormalCdf(-1.2815516), 0.1, 1e-7);
}

TEST(NormalCdfTest, MatchesBoostAcrossRange) {
  for (double z = -8.0; z <= 8.0; z += 0.0137) {
    EXPECT_NEAR(NormalCdf(z), boost::math::cdf(kStdNormal, z), 1e-12) << z;
  }
}

TEST(NormalCdfTest, Monotone) {
  double prev = 0.0;
  for (double z = -10.0; z <= 10.0; z += 0.001) {
    const double v = NormalCdf(z);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(NormalQuantileTest, KnownValues) {
  EXPECT_EQ(NormalQuantile(0.5), 0.0);
  EXPECT_NEAR(NormalQuantile(0.9), 1.2815516, 1e-7);
  EXPECT_NEAR(NormalQuantile(0.8413447), 1.0, 1e-6);
}

TEST(NormalQuantileTest, MatchesBoostOnWideGrid) {
  std::vector<double> ps;
  for (int e = -12; e <= -1; ++e) {
    for (double m : {1.0, 2.5, 5.0, 7.5}) ps.push_back(m * std::pow(10.0, e));
  }
  for (double p = 0.01; p < 1.0; p += 0.0101) ps.push_back(p);
  for (double p : ps) {
    if (p >= 1.0) continue;
    const double ref = boost::math::quantile(kStdNormal, p);
    EXPECT_NEAR(NormalQuantile(p), ref, 1e-9 * std::max(1.0, std::fabs(ref)))
        << p;
    const double upper = boost::math::quantile(kStdNormal, 1.0 - p);
    EXPECT_NEAR(NormalQuantile(1.0 - p), upper,
                1e-9 * std::max(1.0, std::fabs(upper)))
        << 1.0 - p;
  }
}

TEST(NormalQuantileTest, CdfResidualWithinContract) {
  for (double p = 1e-12; p < 1.0 - 1e-12; p = p < 0.01 ? p * 1.7 : p + 0.003) {
    EXPECT_LE(std::fabs(NormalCdf(NormalQuantile(p)) - p), 1e-10) << p;
  }
}

TEST(NormalQuantileTest, RoundTripOnSixSigma) {
  for (double z = -6.0; z <= 6.0; z += 0.0012) {
    EXPECT_LE(std::fabs(NormalQuantile(NormalCdf(z)) - z), 1e-8) << z;
  }
}

TEST(NormalQuantileTest, StrictlyIncreasing) {
  double prev = -INFINITY;
  for (double p = 1e-6; p < 1.0; p += 1e-4) {
    const double z = NormalQuantile(p);
    EXPECT_GT(z, prev);
    prev = z;
  }
}

TEST(NormalQuantileTest, RejectsEndpoints) {
  for (double p : {0.0, 1.0, -0.1, 1.5, std::nan("")}) {
    try {
      NormalQuantile(p);
      ADD_FAILURE() << "no error for " << p;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kDomainError);
    }
  }
}

TEST(IncompleteBetaTest, MatchesBoost) {
  for (double a : {0.5, 1.0, 3.0, 80.0, 900.0}) {
    for (double b : {0.5, 1.0, 21.0, 101.0}) {
      for (double x : {1e-6, 0.1, 0.5, 0.77, 0.999}) {
        EXPECT_NEAR(RegularizedIncompleteBeta(a, b, x),
                    boost::math::ibeta(a, b, x), 1e-12)
            << a << " " << b << " " << x;
      }
    }
  }
}

TEST(ClopperPearsonTest, ZeroSuccessesGiveZero) {
  EXPECT_EQ(ClopperPearsonLower(0, 100, 0.001), 0.0);
}

TEST(ClopperPearsonTest, AllSuccessesClosedForm) {
  EXPECT_NEAR(ClopperPearsonLower(100, 100, 0.001), std::pow(0.001, 0.01),
              1e-10);
  EXPECT_NEAR(ClopperPearsonLower(100, 100, 0.001), 0.933254, 1e-6);
  EXPECT_LT(ClopperPearsonLower(100, 100, 0.001), 1.0);
}

TEST(ClopperPearsonTest, MatchesBetaQuantileOracle) {
  const double v = ClopperPearsonLower(80, 100, 0.05);
  EXPECT_GT(v, 0.71);
  EXPECT_LT(v, 0.74);
  for (int64_t n : {10, 100, 1000, 10000}) {
    for (int64_t k = 1; k <= n; k += std::max<int64_t>(1, n / 7)) {
      for (double alpha : {0.05, 0.001, 1e-5}) {
        const double ref =
            boost::math::quantile(boost::math::beta_distribution<>(
                                      static_cast<double>(k),
                                      static_cast<double>(n - k + 1)),
                                  alpha);
        EXPECT_NEAR(ClopperPearsonLower(k, n, alpha), ref, 1e-12)
            << k << "/" << n << " at " << alpha;
      }
    }
  }
}

TEST(ClopperPearsonTest, MonotoneInCountAndAlpha) {
  const int64_t n = 200;
  double prev = -1.0;
  for (int64_t k = 0; k <= n; ++k) {
    const double v = ClopperPearsonLower(k, n, 0.01);
    EXPECT_GE(v, prev);
    prev = v;
    EXPECT_LE(ClopperPearsonLower(k, n, 0.05), ClopperPearsonLower(k, n, 0.05));
    EXPECT_GE(ClopperPearsonLower(k, n, 0.05), ClopperPearsonLower(k, n, 0.001));
  }
}

TEST(ClopperPearsonTest, RejectsBadCounts) {
  EXPECT_THROW(ClopperPearsonLower(5, 4, 0.01), Error);
  EXPECT_THROW(ClopperPearsonLower(1, 0, 0.01), Error);
  EXPECT_THROW(ClopperPearsonLower(1, 4, 0.0), Error);
}

// Goodman (1965) upper bound with the chi-square quantile at 1 - alpha / K.
std::vector<double> GoodmanOracle(const std::vector<int64_t>& counts,
                                  double alpha) {
  const double k = static_cast<double>(counts.size());
  const double a = boost::math::quantile(
      boost::math::complement(boost::math::chi_squared(1.0), alpha / k));
  double n = 0.0;
  for (int64_t c : counts) n += static_cast<double>(c);
  std::vector<double> out;
  for (int64_t c : counts) {
    const double ni = static_cast<double>(c);
    out.push_back((a + 2.0 * ni + std::sqrt(a * (a + 4.0 * ni * (n - ni) / n))) /
                  (2.0 * (n + a)));
  }
  return out;
}

TEST(GoodmanTest, MatchesChiSquareFormula) {
  const std::vector<int64_t> counts = {50, 30, 20};
  const auto got = GoodmanUpper(counts, 0.05);
  const auto ref = GoodmanOracle(counts, 0.05);
  ASSERT_EQ(got.size(), 3u);
  for (size_t c = 0; c < 3; ++c) EXPECT_NEAR(got[c], ref[c], 1e-9);
}

TEST(GoodmanTest, IntervalBracketsPointEstimate) {
  const std::vector<int64_t> counts = {500, 300, 150, 50};
  const GoodmanBounds b = GoodmanInterval(counts, 0.01);
  for (size_t c = 0; c < counts.size(); ++c) {
    const double phat = counts[c] / 1000.0;
    EXPECT_LT(b.lower[c], phat);
    EXPECT_GT(b.upper[c], phat);
  }
}

TEST(GoodmanTest, UnanimousCountsBoundTopClassAtOne) {
  double prev_empty = 1.0;
  for (int64_t n : {10, 100, 1000, 100000}) {
    const auto u = GoodmanUpper(std::vector<int64_t>{n, 0, 0}, 0.001);
    EXPECT_LE(u[0], 1.0);
    EXPECT_NEAR(u[0], 1.0, 1e-15);
    EXPECT_LT(u[1], prev_empty);
    prev_empty = u[1];
    EXPECT_GT(u[1], 0.0);
    EXPECT_GT(u[2], 0.0);
  }
}

TEST(GoodmanTest, SymmetricCountsGiveEqualBounds) {
  const auto u = GoodmanUpper(std::vector<int64_t>{1, 1}, 0.5);
  EXPECT_EQ(u[0], u[1]);
}

TEST(GoodmanTest, RejectsDegenerateInput) {
  EXPECT_THROW(GoodmanUpper(std::vector<int64_t>{}, 0.05), Error);
  EXPECT_THROW(GoodmanUpper(std::vector<int64_t>{3}, 0.05), Error);
  EXPECT_THROW(GoodmanUpper(std::vector<int64_t>{0, 0}, 0.05), Error);
}

TEST(BonferroniTest, Division) {
  EXPECT_EQ(BonferroniAdjust(0.001, 1), 0.001);
  EXPECT_NEAR(BonferroniAdjust(0.001, 3), 0.001 / 3.0, 1e-18);
  EXPECT_EQ(BonferroniAdjust(0.05, 2), 0.025);
  EXPECT_THROW(BonferroniAdjust(0.05, 0), Error);
}

TEST(BinomialTestTest, PValues) {
  EXPECT_EQ(BinomialTwoSidedPValue(50, 100), 1.0);
  // 2 * P[X <= 49] for X ~ Bin(100, 1/2); symmetric so 2m = n - 2 here.
  const double p = BinomialTwoSidedPValue(49, 100);
  EXPECT_GT(p, 0.5);
  EXPECT_NEAR(BinomialTwoSidedPValue(0, 10), 2.0 * std::pow(0.5, 10), 1e-15);
}

}  // namespace
}  // namespace certsmooth
