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

#include "certsmooth/classifier.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "certsmooth/error.h"
#include "certsmooth/smoothing.h"

namespace certsmooth {
namespace {

using Vec = std::vector<double>;

LinearClassifier SignOfFirstAxis() {
  return LinearClassifier({{1.0, 0.0}, {-1.0, 0.0}}, {0.0, 0.0});
}

double Phi(double z) { return boost::math::cdf(boost::math::normal(), z); }

TEST(LinearClassifierTest, ClassifiesBySign) {
  const auto f = SignOfFirstAxis();
  EXPECT_EQ(f.Classify(Vec{0.3, 5.0}), 0);
  EXPECT_EQ(f.Classify(Vec{-0.3, 5.0}), 1);
}

TEST(LinearClassifierTest, TiesGoToLowestIndex) {
  EXPECT_EQ(SignOfFirstAxis().Classify(Vec{0.0, 0.0}), 0);
  const auto c = LinearClassifier::Constant(4, 2, 2);
  EXPECT_EQ(c.Classify(Vec{1.0, -1.0}), 2);
}

TEST(LinearClassifierTest, RejectsWrongDimension) {
  try {
    SignOfFirstAxis().Classify(Vec{1.0});
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(LinearClassifierTest, BinaryExactConfidence) {
  const auto f = SignOfFirstAxis();
  EXPECT_NEAR(f.ExactConfidence(Vec{1.0, 0.0}, 1.0, 0), 0.8413447460685429,
              1e-12);
  EXPECT_NEAR(f.ExactConfidence(Vec{0.0, 0.0}, 1.0, 0), 0.5, 1e-15);
  // Margin-normal form with unequal rows: v = w0 - w1, m = v.x + b0 - b1.
  const LinearClassifier g({{0.3, -1.2, 0.5}, {-0.4, 0.8, 0.1}}, {0.2, -0.1});
  const Vec x = {0.7, 0.1, -0.6};
  const Vec v = {0.7, -2.0, 0.4};
  const double m = 0.7 * 0.7 - 2.0 * 0.1 - 0.4 * 0.6 + 0.3;
  const double norm = std::sqrt(0.49 + 4.0 + 0.16);
  for (double sigma : {0.1, 0.5, 2.0}) {
    EXPECT_NEAR(g.ExactConfidence(x, sigma, 0), Phi(m / (sigma * norm)), 1e-12);
    EXPECT_NEAR(g.ExactConfidence(x, sigma, 1), Phi(-m / (sigma * norm)),
                1e-12);
  }
}

// Independent oracle: for each u the class region is an interval in v
// obtained by intersecting the half-lines (w_c - w_j).(x + sigma (u, v)) +
// b_c - b_j >= 0; its normal mass is integrated over u by adaptive
// Gauss-Kronrod without any breakpoint splitting.
double RegionMassOracle(const LinearClassifier& f, const Vec& x, double sigma,
                        Label c) {
  namespace bq = boost::math::quadrature;
  const auto& w = f.weights();
  const auto& b = f.biases();
  auto inner = [&](double u) {
    double lo = -INFINITY, hi = INFINITY;
    for (size_t j = 0; j < w.size(); ++j) {
      if (static_cast<Label>(j) == c) continue;
      const double d0 = w[c][0] - w[j][0], d1 = w[c][1] - w[j][1];
      const double a = d0 * (x[0] + sigma * u) + d1 * x[1] + b[c] - b[j];
      const double slope = d1 * sigma;
      if (slope > 0) {
        lo = std::max(lo, -a / slope);
      } else if (slope < 0) {
        hi = std::min(hi, -a / slope);
      } else if (a < 0) {
        return 0.0;
      }
    }
    if (hi <= lo) return 0.0;
    return (Phi(hi) - Phi(lo)) * std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
  };
  // Vertical boundaries make the integrand jump; integrate between them.
  std::vector<double> cuts = {-10.0, 10.0};
  for (size_t j = 0; j < w.size(); ++j) {
    const double d0 = w[c][0] - w[j][0], d1 = w[c][1] - w[j][1];
    if (static_cast<Label>(j) == c || d1 != 0.0 || d0 == 0.0) continue;
    const double u = -(d0 * x[0] + d1 * x[1] + b[c] - b[j]) / (d0 * sigma);
    if (u > -10.0 && u < 10.0) cuts.push_back(u);
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += bq::gauss_kronrod<double, 61>::integrate(inner, cuts[i],
                                                      cuts[i + 1], 18, 1e-11);
  }
  return total;
}

TEST(LinearClassifierTest, MulticlassExactConfidenceMatchesQuadrature) {
  const auto f = LinearClassifier::NearestCentroid(
      {{0.0, 0.0}, {0.4, 0.0}, {0.2, 1.0}, {0.2, -4.0}});
  for (const Vec& x : {Vec{0.05, 0.02}, Vec{0.3, 0.4}, Vec{0.2, -1.0}}) {
    for (double sigma : {0.25, 1.0}) {
      const Vec p = f.ExactConfidences(x, sigma);
      double total = 0.0;
      for (Label c = 0; c < 4; ++c) {
        EXPECT_NEAR(p[c], RegionMassOracle(f, x, sigma, c), 1e-7)
            << "class " << c << " sigma " << sigma;
        total += p[c];
      }
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
  }
}

TEST(LinearClassifierTest, ExactConfidenceMatchesMonteCarlo) {
  const auto f = LinearClassifier::NearestCentroid(
      {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}});
  const Vec x = {0.3, 0.2};
  const double sigma = 0.5;
  const int64_t n = 1000000;
  const VoteHistogram h = SampleVotes(f, x, sigma, n, {11, 0});
  const Vec p = f.ExactConfidences(x, sigma);
  for (Label c = 0; c < 3; ++c) {
    EXPECT_LE(std::fabs(static_cast<double>(h.counts[c]) / n - p[c]),
              5.0 / std::sqrt(static_cast<double>(n)));
  }
}

TEST(LinearClassifierTest, MulticlassHighDimensionIsUnsupported) {
  const LinearClassifier f({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {0, 0, 0});
  EXPECT_FALSE(f.HasExactConfidences());
  try {
    f.ExactConfidences(Vec{0, 0, 0}, 1.0);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsupported);
  }
}

TEST(GridClassifierTest, LookupAndExactConfidence) {
  // Cells on each axis: (-inf,0), [0,1), [1,inf). Cell [0,1)^2 is labeled 3.
  std::vector<Label> labels(9, 0);
  labels[1 * 3 + 1] = 3;
  const GridClassifier g(4, {{0.0, 1.0}, {0.0, 1.0}}, labels);
  EXPECT_EQ(g.Classify(Vec{0.5, 0.5}), 3);
  EXPECT_EQ(g.Classify(Vec{1.0, 0.5}), 0);  // half-open on the right
  const double sigma = 0.7;
  const double axis = Phi((1.0 - 0.5) / sigma) - Phi((0.0 - 0.5) / sigma);
  EXPECT_NEAR(g.ExactConfidence(Vec{0.5, 0.5}, sigma, 3), axis * axis, 1e-12);
  EXPECT_NEAR(g.ExactConfidence(Vec{0.5, 0.5}, sigma, 0), 1.0 - axis * axis,
              1e-12);
}

TEST(GridClassifierTest, HalfLineExample) {
  const GridClassifier g(2, {{0.0}}, {0, 1});
  EXPECT_NEAR(g.ExactConfidence(Vec{0.5}, 0.5, 1), 0.8413447460685429, 1e-12);
}

TEST(GridClassifierTest, ConfidencesSumToOne) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> lab(0, 2);
  std::vector<Label> labels(4 * 5);
  for (auto& l : labels) l = lab(rng);
  const GridClassifier g(3, {{-1.0, 0.0, 0.5}, {-2.0, -0.1, 0.3, 2.0}}, labels);
  for (double sigma : {0.05, 0.5, 3.0}) {
    const Vec p = g.ExactConfidences(Vec{0.2, -0.3}, sigma);
    EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);
  }
}

TEST(GridClassifierTest, RejectsBadShapes) {
  EXPECT_THROW(GridClassifier(2, {{1.0, 0.0}}, {0, 1, 0}), Error);
  EXPECT_THROW(GridClassifier(2, {{0.0}}, {0, 2}), Error);
  EXPECT_THROW(GridClassifier(2, {{0.0}, {0.0}, {0.0}, {0.0}},
                              std::vector<Label>(16, 0)),
               Error);
}

TEST(ExternalDumpClassifierTest, MissingRowIsProtocolError) {
  ExternalDumpClassifier f(2, 2);
  const std::vector<float> rows = {0.5f, 1.5f};
  f.AddPredictions(rows, std::vector<Label>{1});
  EXPECT_EQ(f.Classify(Vec{0.5, 1.5}), 1);
  try {
    f.Classify(Vec{0.5, 1.25});
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProtocol);
  }
  try {
    f.ExactConfidences(Vec{0.5, 1.5}, 1.0);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsupported);
  }
}

TEST(ClassifierJsonTest, BuildsEachKind) {
  auto lin = ClassifierFromJson(nlohmann::json::parse(
      R"({"kind":"linear","weights":[[1,0],[-1,0]],"biases":[0,0]})"));
  EXPECT_EQ(lin->Classify(Vec{-1.0, 0.0}), 1);
  auto nc = ClassifierFromJson(nlohmann::json::parse(
      R"({"kind":"nearest_centroid","centers":[[0,0],[2,0]]})"));
  EXPECT_EQ(nc->Classify(Vec{1.1, 0.0}), 1);
  auto k = ClassifierFromJson(nlohmann::json::parse(
      R"({"kind":"constant","num_classes":3,"dim":1,"label":2})"));
  EXPECT_EQ(k->Classify(Vec{0.0}), 2);
  auto g = ClassifierFromJson(nlohmann::json::parse(
      R"({"kind":"grid","num_classes":2,"boundaries":[[0]],"labels":[0,1]})"));
  EXPECT_EQ(g->Classify(Vec{0.1}), 1);
  EXPECT_THROW(ClassifierFromJson(nlohmann::json::parse(R"({"kind":"mlp"})")),
               Error);
  EXPECT_THROW(ClassifierFromJson(nlohmann::json::parse(R"({"kind":"linear"})")),
               Error);
}

}  // namespace
}  // namespace certsmooth
