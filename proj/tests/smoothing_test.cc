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

#include "certsmooth/smoothing.h"

#include <omp.h>

#include <cmath>
#include <random>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>
#include <gtest/gtest.h>

#include "certsmooth/stats.h"

namespace certsmooth {
namespace {

using Vec = std::vector<double>;

double Quantile(double p) {
  return boost::math::quantile(boost::math::normal(), p);
}

LinearClassifier SignOfFirstAxis() {
  return LinearClassifier({{1.0, 0.0}, {-1.0, 0.0}}, {0.0, 0.0});
}

TEST(SampleVotesTest, ConstantClassifier) {
  const auto f = LinearClassifier::Constant(4, 3, 2);
  const VoteHistogram h = SampleVotes(f, Vec{0, 0, 0}, 1.0, 50, {1, 0});
  EXPECT_EQ(h.counts, (std::vector<int64_t>{0, 0, 50, 0}));
  EXPECT_EQ(h.n, 50);
}

TEST(SampleVotesTest, TinySigmaVotesForCleanLabel) {
  const auto f = SignOfFirstAxis();
  const VoteHistogram h = SampleVotes(f, Vec{-0.01, 0.0}, 1e-12, 200, {1, 0});
  EXPECT_EQ(h.counts[1], 200);
}

TEST(SampleVotesTest, FrequencyNearExactConfidence) {
  const auto f = SignOfFirstAxis();
  const VoteHistogram h = SampleVotes(f, Vec{1.0, 0.0}, 1.0, 1000000, {3, 0});
  const double freq = static_cast<double>(h.counts[0]) / 1e6;
  EXPECT_GE(freq, 0.8398);
  EXPECT_LE(freq, 0.8429);
}

TEST(SampleVotesTest, ParallelMatchesSerialForAnyThreadCount) {
  const auto f = LinearClassifier::NearestCentroid(
      {{0.0, 0.0}, {0.4, 0.0}, {0.2, 1.0}});
  const Vec x = {0.1, 0.2};
  const NoiseKey key{17, 4, StreamTag(2, Phase::kEstimate)};
  const VoteHistogram ref = SampleVotesSerial(f, x, 0.5, 20001, key);
  for (int threads : {1, 2, 3, 8}) {
    omp_set_num_threads(threads);
    EXPECT_EQ(SampleVotes(f, x, 0.5, 20001, key).counts, ref.counts)
        << threads << " threads";
  }
}

TEST(CertifyTest, ConstantClassifierClosedForm) {
  const auto f = LinearClassifier::Constant(3, 2, 1);
  CertifyParams p;
  p.sigma = 0.5;
  p.n = 100;
  const CertificationResult r = Certify(f, Vec{0, 0}, p, 1);
  EXPECT_EQ(r.prediction, 1);
  const double bound = std::pow(0.001, 0.01);
  EXPECT_NEAR(r.p_lower, bound, 1e-12);
  EXPECT_NEAR(r.radius, 0.5 * Quantile(bound), 1e-10);
  EXPECT_NEAR(r.radius, 0.75023751, 1e-8);
}

TEST(CertifyTest, SymmetricPointAbstains) {
  const auto f = SignOfFirstAxis();
  CertifyParams p;
  p.n = 1000;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const CertificationResult r = Certify(f, Vec{0, 0}, p, seed);
    EXPECT_TRUE(r.abstained());
    EXPECT_EQ(r.radius, 0.0);
  }
}

TEST(CertifyTest, RadiusFromCountsUsesBetaQuantile) {
  const int64_t n = 10000, k = 9933;
  VoteHistogram sel{{100, 0}, 100, 0.25, {}};
  VoteHistogram est{{k, n - k}, n, 0.25, {}};
  CertifyParams p;
  p.sigma = 0.25;
  const CertificationResult r = CertifyFromHistograms(sel, est, p);
  const double lower = boost::math::quantile(
      boost::math::beta_distribution<>(k, n - k + 1), 0.001);
  EXPECT_EQ(r.prediction, 0);
  EXPECT_NEAR(r.p_lower, lower, 1e-12);
  EXPECT_NEAR(r.radius, 0.25 * Quantile(lower), 1e-10);
}

TEST(CertifyTest, ThresholdShiftsRadius) {
  VoteHistogram sel{{100, 0}, 100, 1.0, {}};
  VoteHistogram est{{900, 100}, 1000, 1.0, {}};
  CertifyParams p;
  p.sigma = 1.0;
  p.n = 1000;
  p.p0 = 0.7;
  const CertificationResult r = CertifyFromHistograms(sel, est, p);
  EXPECT_NEAR(r.radius, Quantile(r.p_lower) - Quantile(0.7), 1e-10);
  p.p0 = 0.95;
  EXPECT_TRUE(CertifyFromHistograms(sel, est, p).abstained());
}

TEST(CertifyTest, DeterministicGivenSeed) {
  const auto f = LinearClassifier::NearestCentroid({{0, 0}, {1, 0}, {0, 1}});
  CertifyParams p;
  p.n = 2000;
  const auto a = Certify(f, Vec{0.2, 0.1}, p, 5, 9);
  const auto b = Certify(f, Vec{0.2, 0.1}, p, 5, 9);
  EXPECT_EQ(a.prediction, b.prediction);
  EXPECT_EQ(a.radius, b.radius);
  EXPECT_EQ(a.estimation.counts, b.estimation.counts);
  EXPECT_NE(a.selection.key.stream, a.estimation.key.stream);
}

TEST(CertifyTest, SoundAgainstExactRadiusInMostRuns) {
  // Over-claims (radius above the exact one) are bounded by alpha.
  const auto f = SignOfFirstAxis();
  const Vec x = {0.4, 0.0};
  CertifyParams p;
  p.sigma = 0.5;
  p.n = 1000;
  const double exact = 0.4;  // sigma * Phi^{-1}(Phi(0.4 / 0.5))
  int over = 0;
  for (uint64_t seed = 0; seed < 300; ++seed) {
    const auto r = Certify(f, x, p, seed);
    if (r.radius > exact) ++over;
  }
  EXPECT_LE(over, 2);
}

TEST(CertifyTest, LipschitzOfSmoothedMargin) {
  // x -> sigma Phi^{-1}(p(x)) is 1-Lipschitz for the exact smoothed model.
  const auto f = LinearClassifier::NearestCentroid({{0, 0}, {1, 0}, {0, 1}});
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  const double sigma = 0.5;
  for (int t = 0; t < 200; ++t) {
    const Vec a = {u(rng), u(rng)}, b = {u(rng), u(rng)};
    const double dist = std::hypot(a[0] - b[0], a[1] - b[1]);
    for (Label c = 0; c < 3; ++c) {
      const double pa = ClampProbability(f.ExactConfidence(a, sigma, c));
      const double pb = ClampProbability(f.ExactConfidence(b, sigma, c));
      if (pa <= 1e-9 || pb <= 1e-9 || pa >= 1 - 1e-9 || pb >= 1 - 1e-9) continue;
      EXPECT_LE(std::fabs(sigma * (NormalQuantile(pa) - NormalQuantile(pb))),
                dist * (1.0 + 1e-6));
    }
  }
}

TEST(CertifyTest, RadiusGrowsWithSampleCount) {
  const auto f = SignOfFirstAxis();
  const Vec x = {0.3, 0.0};
  double prev = 0.0;
  for (int64_t n : {100, 1000, 10000}) {
    CertifyParams p;
    p.sigma = 0.5;
    p.n = n;
    double mean = 0.0;
    for (uint64_t seed = 0; seed < 40; ++seed) mean += Certify(f, x, p, seed).radius;
    mean /= 40.0;
    EXPECT_GE(mean, prev);
    prev = mean;
  }
}

TEST(PredictTest, BinomialDecision) {
  EXPECT_EQ(PredictFromCounts(std::vector<int64_t>{100, 0}, 0.001), 0);
  EXPECT_EQ(PredictFromCounts(std::vector<int64_t>{51, 49}, 0.001), kAbstain);
  EXPECT_EQ(PredictFromCounts(std::vector<int64_t>{0, 100}, 0.001), 1);
}

TEST(PredictTest, EndToEnd) {
  const auto f = LinearClassifier::Constant(2, 1, 1);
  EXPECT_EQ(Predict(f, Vec{0.0}, 1.0, 100, 0.001, 3), 1);
}

}  // namespace
}  // namespace certsmooth
