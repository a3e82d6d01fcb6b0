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

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>

#include "certsmooth/error.h"
#include "certsmooth/stats.h"

namespace certsmooth {
namespace {

void ValidateVoteArgs(const Classifier& classifier, std::span<const double> x,
                      double sigma, int64_t n) {
  Require(static_cast<int>(x.size()) == classifier.dim(),
          "point dimension does not match classifier");
  Require(sigma > 0.0 && std::isfinite(sigma), "sigma must be positive");
  Require(n >= 1, "need at least one noise draw");
}

VoteHistogram EmptyHistogram(const Classifier& classifier, double sigma,
                             int64_t n, const NoiseKey& key) {
  VoteHistogram h;
  h.counts.assign(classifier.num_classes(), 0);
  h.n = n;
  h.sigma = sigma;
  h.key = key;
  return h;
}

void ValidateCertifyParams(const CertifyParams& p) {
  Require(p.n0 >= 1 && p.n >= 1, "certify needs n0 >= 1 and n >= 1");
  Require(p.alpha > 0.0 && p.alpha < 1.0, "alpha must lie in (0, 1)");
  Require(p.p0 >= 0.5 && p.p0 < 1.0, "p0 must lie in [0.5, 1)");
}

}  // namespace

Label VoteHistogram::Top() const {
  return ArgMax(std::span<const int64_t>(counts));
}

VoteHistogram SampleVotesSerial(const Classifier& classifier,
                                std::span<const double> x, double sigma,
                                int64_t n, const NoiseKey& key) {
  ValidateVoteArgs(classifier, x, sigma, n);
  VoteHistogram h = EmptyHistogram(classifier, sigma, n, key);
  const NoiseStream stream(key);
  std::vector<double> eps(x.size());
  std::vector<double> point(x.size());
  for (int64_t i = 0; i < n; ++i) {
    stream.Fill(static_cast<uint64_t>(i), eps);
    AddScaledNoise(x, sigma, eps, point);
    ++h.counts[classifier.Classify(point)];
  }
  return h;
}

VoteHistogram SampleVotes(const Classifier& classifier,
                          std::span<const double> x, double sigma, int64_t n,
                          const NoiseKey& key) {
  ValidateVoteArgs(classifier, x, sigma, n);
  VoteHistogram h = EmptyHistogram(classifier, sigma, n, key);
  const NoiseStream stream(key);
  const int num_classes = classifier.num_classes();
  std::exception_ptr failure;
  std::mutex failure_mutex;

#pragma omp parallel
  {
    std::vector<int64_t> local(num_classes, 0);
    std::vector<double> eps(x.size());
    std::vector<double> point(x.size());
#pragma omp for schedule(static)
    for (int64_t i = 0; i < n; ++i) {
      try {
        stream.Fill(static_cast<uint64_t>(i), eps);
        AddScaledNoise(x, sigma, eps, point);
        ++local[classifier.Classify(point)];
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
#pragma omp critical(certsmooth_vote_merge)
    for (int c = 0; c < num_classes; ++c) h.counts[c] += local[c];
  }
  if (failure) std::rethrow_exception(failure);
  return h;
}

double ThresholdRadius(double sigma, double p, double p0) {
  return sigma *
         (NormalQuantile(ClampProbability(p)) - NormalQuantile(p0));
}

CertificationResult CertifyFromHistograms(VoteHistogram selection,
                                          VoteHistogram estimation,
                                          const CertifyParams& params) {
  ValidateCertifyParams(params);
  Require(selection.counts.size() == estimation.counts.size(),
          "selection and estimation histograms disagree on classes");
  CertificationResult result;
  result.params = params;
  result.guess = selection.Top();
  result.p_lower = ClopperPearsonLower(estimation.counts[result.guess],
                                       estimation.n, params.alpha);
  if (result.p_lower > params.p0) {
    result.prediction = result.guess;
    result.radius = ThresholdRadius(params.sigma, result.p_lower, params.p0);
  }
  result.selection = std::move(selection);
  result.estimation = std::move(estimation);
  return result;
}

CertificationResult Certify(const Classifier& classifier,
                            std::span<const double> x,
                            const CertifyParams& params, uint64_t seed,
                            uint64_t sample_id, uint32_t stage) {
  ValidateCertifyParams(params);
  const NoiseKey select_key{seed, sample_id, StreamTag(stage, Phase::kSelect)};
  const NoiseKey estimate_key{seed, sample_id,
                              StreamTag(stage, Phase::kEstimate)};
  CertificationResult result = CertifyFromHistograms(
      SampleVotes(classifier, x, params.sigma, params.n0, select_key),
      SampleVotes(classifier, x, params.sigma, params.n, estimate_key), params);
  result.key = {seed, sample_id, StreamTag(stage, Phase::kEstimate)};
  return result;
}

Label PredictFromCounts(std::span<const int64_t> counts, double alpha) {
  Require(counts.size() >= 2, "prediction needs at least two classes");
  Require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  const Label top = ArgMax(counts);
  int64_t runner_up = -1;
  for (size_t c = 0; c < counts.size(); ++c) {
    if (static_cast<Label>(c) != top) runner_up = std::max(runner_up, counts[c]);
  }
  const int64_t trials = counts[top] + runner_up;
  if (trials == 0) return kAbstain;
  return BinomialTwoSidedPValue(counts[top], trials) <= alpha ? top : kAbstain;
}

Label Predict(const Classifier& classifier, std::span<const double> x,
              double sigma, int64_t n, double alpha, uint64_t seed,
              uint64_t sample_id) {
  const VoteHistogram h = SampleVotes(
      classifier, x, sigma, n,
      {seed, sample_id, StreamTag(0, Phase::kEstimate)});
  return PredictFromCounts(h.counts, alpha);
}

}  // namespace certsmooth
