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

// Single-scale randomized smoothing: Monte-Carlo votes, CERTIFY and PREDICT.

#ifndef CERTSMOOTH_SMOOTHING_H_
#define CERTSMOOTH_SMOOTHING_H_

#include <cstdint>
#include <span>
#include <vector>

#include "certsmooth/classifier.h"
#include "certsmooth/philox.h"

namespace certsmooth {

struct VoteHistogram {
  std::vector<int64_t> counts;
  int64_t n = 0;
  double sigma = 0.0;
  NoiseKey key;

  // argmax with ties to the lowest class index.
  Label Top() const;
};

// Lowest-index argmax of any per-class score vector.
template <typename T>
Label ArgMax(std::span<const T> values) {
  Label best = 0;
  for (size_t c = 1; c < values.size(); ++c) {
    if (values[c] > values[best]) best = static_cast<Label>(c);
  }
  return best;
}

// Classifies x + sigma * eps_i for i < n. Draws are split across OpenMP
// threads; per-index noise and integer counting make the histogram identical
// for every thread count.
VoteHistogram SampleVotes(const Classifier& classifier,
                          std::span<const double> x, double sigma, int64_t n,
                          const NoiseKey& key);

// Single-threaded reference for SampleVotes.
VoteHistogram SampleVotesSerial(const Classifier& classifier,
                                std::span<const double> x, double sigma,
                                int64_t n, const NoiseKey& key);

struct CertifyParams {
  double sigma = 0.25;
  int64_t n0 = 100;
  int64_t n = 10000;
  double alpha = 0.001;
  double p0 = 0.5;
};

struct CertificationResult {
  Label prediction = kAbstain;
  double radius = 0.0;
  double p_lower = 0.0;
  Label guess = kAbstain;  // candidate picked from the n0 draws
  CertifyParams params;
  NoiseKey key;  // base key; phases use derived streams
  VoteHistogram selection;
  VoteHistogram estimation;

  bool abstained() const { return prediction == kAbstain; }
};

// sigma * (Phi^{-1}(p) - Phi^{-1}(p0)), with p clamped away from 0 and 1.
double ThresholdRadius(double sigma, double p, double p0);

// Decision rule on already drawn histograms: the guess is the top class of
// `selection`, p_lower its Clopper-Pearson bound in `estimation`.
CertificationResult CertifyFromHistograms(VoteHistogram selection,
                                          VoteHistogram estimation,
                                          const CertifyParams& params);

// CERTIFY with the abstention threshold p0 (p0 = 1/2 gives the usual
// sigma * Phi^{-1}(p_lower) radius). `stage` selects the noise streams so
// several scales can share one seed.
CertificationResult Certify(const Classifier& classifier,
                            std::span<const double> x,
                            const CertifyParams& params, uint64_t seed,
                            uint64_t sample_id = 0, uint32_t stage = 0);

// Top class if an exact two-sided binomial test of top vs. runner-up counts
// rejects at alpha, else kAbstain.
Label PredictFromCounts(std::span<const int64_t> counts, double alpha);

Label Predict(const Classifier& classifier, std::span<const double> x,
              double sigma, int64_t n, double alpha, uint64_t seed,
              uint64_t sample_id = 0);

}  // namespace certsmooth

#endif  // CERTSMOOTH_SMOOTHING_H_
