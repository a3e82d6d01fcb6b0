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

#include <cmath>
#include <random>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <gtest/gtest.h>

#include "certsmooth/error.h"
#include "certsmooth/stats.h"

namespace certsmooth {
namespace {

using Vec = std::vector<double>;

double Q(double p) { return boost::math::quantile(boost::math::normal(), p); }

TEST(CascadeRadiusTest, HaltingTermBinds) {
  const std::vector<LaterStageBounds> later = {{0.5, {0.8, 0.2}}};
  const double r = CascadeRadius(0.25, 0.9, 0, later, 0.5);
  EXPECT_NEAR(r, 0.25 * Q(0.9), 1e-12);
  EXPECT_NEAR(r, 0.32039, 1e-5);
  EXPECT_NEAR(0.5 * (0.0 - Q(0.2)), 0.42081, 1e-5);
}

TEST(CascadeRadiusTest, LaterStageTermBinds) {
  // Halting stage 0.95 at sigma 0.25; at sigma 0.5 the strongest competitor
  // has upper bound 0.4.
  const std::vector<LaterStageBounds> later = {{0.5, {0.35, 0.4, 0.25}}};
  const double r = CascadeRadius(0.25, 0.95, 0, later, 0.5);
  EXPECT_NEAR(0.25 * Q(0.95), 0.41121, 1e-5);
  EXPECT_NEAR(r, 0.5 * -Q(0.4), 1e-12);
  EXPECT_NEAR(r, 0.12667, 1e-5);
}

TEST(CascadeRadiusTest, ClampsAtZeroAndUsesThreshold) {
  const std::vector<LaterStageBounds> later = {{1.0, {0.3, 0.6}}};
  EXPECT_EQ(CascadeRadius(0.5, 0.99, 0, later, 0.5), 0.0);
  // General p0: the competitor term is sigma (Phi^{-1}(p0) - Phi^{-1}(p)).
  const std::vector<LaterStageBounds> mild = {{1.0, {0.1, 0.5}}};
  EXPECT_NEAR(CascadeRadius(0.5, 0.99, 0, mild, 0.7),
              std::min(0.5 * (Q(0.99) - Q(0.7)), Q(0.7) - Q(0.5)), 1e-12);
}

TEST(CascadeTest, SingleStageReducesToCertify) {
  const auto f = LinearClassifier::NearestCentroid({{0, 0}, {0.6, 0}, {0, 0.8}});
  CascadeConfig cfg;
  cfg.sigmas = {0.3};
  cfg.n = 3000;
  cfg.seed = 12;
  const CertifyParams p{0.3, cfg.n0, cfg.n, cfg.alpha, cfg.p0};
  for (const Vec& x : {Vec{0.05, 0.0}, Vec{0.2, 0.1}, Vec{0.3, 0.0}}) {
    const CascadeTrace t = CascadePredictCertify(f, x, cfg, 4);
    const CertificationResult c = Certify(f, x, p, cfg.seed, 4);
    EXPECT_EQ(t.prediction, c.prediction);
    EXPECT_NEAR(t.radius, c.radius, 1e-12);
  }
}

TEST(CascadeTest, TraceRadiusMatchesRecordedBounds) {
  const auto f = LinearClassifier::NearestCentroid(
      {{0, 0}, {0.4, 0}, {0.2, 1.0}, {0.2, -4.0}});
  CascadeConfig cfg;
  cfg.sigmas = {0.25, 0.5, 1.0};
  cfg.n = 1000;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 0.3);
  for (uint64_t id = 0; id < 40; ++id) {
    const Vec x = {g(rng), g(rng)};
    const CascadeTrace t = CascadePredictCertify(f, x, cfg, id);
    ASSERT_FALSE(t.stages.empty());
    EXPECT_EQ(t.stages.front().sigma, 1.0);
    EXPECT_LE(t.SpentAlpha(), cfg.alpha * (1.0 + 1e-12));
    if (t.abstained()) {
      EXPECT_EQ(t.radius, 0.0);
      EXPECT_EQ(t.stages.size(), 3u);
      continue;
    }
    const StageRecord& halt = t.stages.back();
    std::vector<LaterStageBounds> later;
    for (const StageRecord& s : t.stages) {
      if (s.decision == StageDecision::kHalt) continue;
      later.push_back({s.sigma, GoodmanUpper(s.certification.estimation.counts,
                                             cfg.alpha / t.stages.size())});
    }
    EXPECT_EQ(t.radius, CascadeRadius(halt.sigma, halt.certification.p_lower,
                                      t.prediction, later, cfg.p0));
    EXPECT_LE(t.radius, halt.sigma * (NormalQuantile(halt.certification.p_lower) -
                                      NormalQuantile(cfg.p0)) + 1e-15);
  }
}

TEST(CascadeTest, RaisingThresholdNeverUnabstains) {
  const auto f = LinearClassifier::NearestCentroid({{0, 0}, {0.5, 0}, {0, 0.5}});
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.1, 0.3);
  for (uint64_t id = 0; id < 40; ++id) {
    const Vec x = {g(rng), g(rng)};
    CascadeConfig lo;
    lo.sigmas = {0.25, 0.5};
    lo.n = 500;
    CascadeConfig hi = lo;
    hi.p0 = 0.8;
    const CascadeTrace a = CascadePredictCertify(f, x, lo, id);
    const CascadeTrace b = CascadePredictCertify(f, x, hi, id);
    if (a.abstained()) { EXPECT_TRUE(b.abstained()); }
  }
}

TEST(CascadeTest, ConfigValidation) {
  const auto f = LinearClassifier::Constant(2, 1, 0);
  CascadeConfig cfg;
  cfg.sigmas = {0.5, 0.25};
  EXPECT_THROW(CascadePredictCertify(f, Vec{0.0}, cfg), Error);
  cfg.sigmas = {};
  EXPECT_THROW(CascadePredictCertify(f, Vec{0.0}, cfg), Error);
  cfg.sigmas = {0.25};
  cfg.p0 = 0.4;
  EXPECT_THROW(CascadePredictCertify(f, Vec{0.0}, cfg), Error);
}

TEST(CascadeExactTest, MarginPointAbstainsEverywhere) {
  const LinearClassifier f({{1.0, 0.0}, {-1.0, 0.0}}, {0.0, 0.0});
  const ExactCascadeResult r = CascadeCertifyExact(f, Vec{0.0, 0.0},
                                                   Vec{0.25, 0.5, 1.0}, 0.5);
  EXPECT_EQ(r.prediction, kAbstain);
  EXPECT_EQ(r.radius, 0.0);
  EXPECT_EQ(r.confidences.size(), 3u);  // p = p0 proceeds at every stage
}

TEST(CascadeExactTest, ConstantClassifierHaltsAtLargestSigma) {
  const auto f = LinearClassifier::Constant(3, 2, 1);
  const ExactCascadeResult r =
      CascadeCertifyExact(f, Vec{0.0, 0.0}, Vec{0.25, 1.0}, 0.5);
  EXPECT_EQ(r.prediction, 1);
  ASSERT_TRUE(r.halt_stage.has_value());
  EXPECT_EQ(*r.halt_stage, 1);
  EXPECT_NEAR(r.radius, 1.0 * Q(1.0 - 1e-12), 1e-9);
}

TEST(CascadeExactTest, LowerStageHaltUsesUpperStageConfidence) {
  // Binary sign classifier: at x = 0.1 the sigma = 1 confidence is
  // Phi(0.1) < 0.7 so the cascade proceeds, and sigma = 0.05 halts.
  const LinearClassifier f({{1.0, 0.0}, {-1.0, 0.0}}, {0.0, 0.0});
  const Vec x = {0.1, 0.0};
  const double p0 = 0.7;
  const ExactCascadeResult r = CascadeCertifyExact(f, x, Vec{0.05, 1.0}, p0);
  ASSERT_EQ(r.prediction, 0);
  ASSERT_EQ(*r.halt_stage, 0);
  const double halt_term = 0.05 * (Q(boost::math::cdf(boost::math::normal(), 2.0)) - Q(p0));
  const double later_term = 1.0 * (Q(p0) - (-0.1));
  EXPECT_NEAR(r.radius, std::min(halt_term, later_term), 1e-9);
  EXPECT_EQ(CascadeDecideExact(f, x, Vec{0.05, 1.0}, p0), 0);
}

TEST(CascadeExactTest, GridSearchFindsNoFlipInsideRadius) {
  const auto f = LinearClassifier::NearestCentroid(
      {{0, 0}, {0.4, 0}, {0.2, 1.0}, {0.2, -4.0}});
  const Vec sigmas = {0.25, 0.5, 1.0};
  std::mt19937_64 rng(14);
  std::normal_distribution<double> g(0.0, 0.5);
  int checked = 0;
  for (int t = 0; t < 30; ++t) {
    const Vec x = {g(rng), g(rng)};
    const ExactCascadeResult r = CascadeCertifyExact(f, x, sigmas, 0.5);
    if (r.prediction == kAbstain || r.radius <= 1e-6) continue;
    ++checked;
    for (double frac : {0.25, 0.5, 0.75, 1.0}) {
      const double rho = frac * (r.radius - 1e-6);
      for (int k = 0; k < 72; ++k) {
        const double th = 2.0 * M_PI * k / 72.0;
        const Vec y = {x[0] + rho * std::cos(th), x[1] + rho * std::sin(th)};
        EXPECT_EQ(CascadeDecideExact(f, y, sigmas, 0.5), r.prediction);
      }
    }
  }
  EXPECT_GT(checked, 5);
}

TEST(CascadeTraceTest, JsonSchema) {
  const auto f = LinearClassifier::Constant(2, 1, 0);
  CascadeConfig cfg;
  cfg.sigmas = {0.25, 0.5};
  cfg.n = 100;
  const auto j = CascadeTraceToJson(CascadePredictCertify(f, Vec{0.0}, cfg));
  EXPECT_EQ(j["schema"], "certsmooth.cascade_trace/1");
  EXPECT_EQ(j["prediction"], 0);
  EXPECT_EQ(j["halt_stage"], 1);
  EXPECT_EQ(j["stages"].size(), 1u);
  EXPECT_EQ(j["stages"][0]["decision"], "halt");
}

}  // namespace
}  // namespace certsmooth
