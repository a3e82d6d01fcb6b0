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

// Evaluation harness: synthetic datasets, batch certification and metrics.

#ifndef CERTSMOOTH_HARNESS_H_
#define CERTSMOOTH_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "certsmooth/calibration.h"
#include "certsmooth/classifier.h"
#include "json.hpp"

namespace certsmooth {

struct EvalRecord {
  uint64_t sample_id = 0;
  Label true_label = 0;
  Label prediction = kAbstain;
  double radius = 0.0;
  std::optional<double> halt_sigma;
  double p_lower = 0.0;
  uint64_t seed = 0;
  double ms = 0.0;

  bool correct() const { return prediction == true_label; }
};

// ---------------------------------------------------------------------------
// Metrics

// Fraction of records predicted correctly with radius > epsilon.
double CertifiedAccuracy(std::span<const EvalRecord> records, double epsilon);

// Mean of radius * 1[correct].
double AverageCertifiedRadius(std::span<const EvalRecord> records);

// Fraction that is correct, or abstained while the clean prediction is right.
double EmpiricalAccuracy(std::span<const EvalRecord> records,
                         const std::vector<bool>& clean_correct);

struct EpsilonGrid {
  double start = 0.0;
  double stop = 2.0;
  double step = 0.01;

  std::vector<double> Values() const;
};

std::vector<double> CertifiedAccuracyCurve(std::span<const EvalRecord> records,
                                           std::span<const double> epsilons);

// Integral over [0, inf) of the certified-accuracy step function.
double CertifiedAccuracyIntegral(std::span<const EvalRecord> records);

struct SummaryMetrics {
  std::vector<double> epsilons;
  std::vector<double> certified_accuracy;
  double acr = 0.0;
  double empirical_accuracy = 0.0;
  double abstention_rate = 0.0;
  ErrorDecomposition errors;
};

SummaryMetrics Summarize(std::span<const EvalRecord> records,
                         const std::vector<bool>& clean_correct,
                         const EpsilonGrid& grid, double p0);

// ---------------------------------------------------------------------------
// Synthetic data

// Isotropic Gaussian mixture with equal class weights.
struct MixtureSpec {
  int dim = 2;
  std::vector<std::vector<double>> means;
  std::vector<double> stddevs;  // per class
  int64_t count = 1000;
  uint64_t seed = 0;

  int num_classes() const { return static_cast<int>(means.size()); }
  void Validate() const;
};

// 2-D, 4 classes whose centers sit 0.2 to 2.0 away from the nearest
// nearest-centroid decision boundary.
MixtureSpec DefaultMixture();

MixtureSpec MixtureFromJson(const nlohmann::json& doc);
nlohmann::ordered_json MixtureToJson(const MixtureSpec& spec);

// Distance from each class mean to its nearest nearest-centroid boundary.
std::vector<double> ClassMargins(const MixtureSpec& spec);

struct SyntheticDataset {
  MixtureSpec spec;
  std::vector<std::vector<double>> points;
  std::vector<Label> labels;

  size_t size() const { return labels.size(); }
};

SyntheticDataset GenerateDataset(const MixtureSpec& spec);

// ---------------------------------------------------------------------------
// Critical sigma

struct CriticalSigma {
  double sigma = 0.0;
  bool above_range = false;  // confidence never fell below 1/2 on the grid
};

struct ScanOptions {
  double sigma_lo = 0.0;
  double sigma_hi = 2.0;
  double step = 0.01;
  // 0 means exact confidences; otherwise Monte-Carlo with n draws.
  int64_t n = 0;
  uint64_t seed = 0;
  uint64_t sample_id = 0;
};

// Smallest grid sigma whose true-class confidence is below 1/2. The grid
// starts at sigma_lo (a zero scale is evaluated as the clean prediction).
CriticalSigma CriticalSigmaScan(const Classifier& classifier,
                                std::span<const double> x, Label y,
                                const ScanOptions& options);

// ---------------------------------------------------------------------------
// Batch runs

enum class Method { kSingle, kCascade, kMaxRadius, kFocal };

std::string MethodName(Method method);
Method ParseMethod(const std::string& name);

struct BatchConfig {
  Method method = Method::kCascade;
  std::vector<double> sigmas = {0.25, 0.5, 1.0};
  double p0 = 0.5;
  double alpha = 0.001;
  int64_t n = 10000;
  int64_t n0 = 100;
  uint64_t seed = 0;
  EpsilonGrid grid;
  double focal_sigma0 = 1.0;
  double focal_sigma1 = 0.5;
  bool record_timing = false;  // off keeps the CSV byte-for-byte reproducible

  void Validate() const;
};

struct BatchResult {
  std::vector<EvalRecord> records;  // ordered by sample_id
  std::vector<bool> clean_correct;
  SummaryMetrics summary;
};

EvalRecord EvaluateSample(const Classifier& classifier,
                          std::span<const double> x, Label y,
                          uint64_t sample_id, const BatchConfig& config);

BatchResult RunBatch(const SyntheticDataset& dataset,
                     const Classifier& classifier, const BatchConfig& config);

// ---------------------------------------------------------------------------
// Reports

// sample_id,true_label,prediction,radius,halt_sigma,p_lower,seed,ms
void WriteRecordsCsv(const std::filesystem::path& path,
                     std::span<const EvalRecord> records);
std::string RecordsCsv(std::span<const EvalRecord> records);

nlohmann::ordered_json SummaryToJson(const SummaryMetrics& summary);

struct CurveSeries {
  std::string name;
  std::vector<double> epsilons;
  std::vector<double> accuracy;
};

// Certified accuracy vs. radius as a standalone SVG document: one <polyline>
// per series inside <g id="curves">, axis labels in <g id="axes">.
std::string CurveSvg(std::span<const CurveSeries> series);
void WriteCurveSvg(const std::filesystem::path& path,
                   std::span<const CurveSeries> series);

}  // namespace certsmooth

#endif  // CERTSMOOTH_HARNESS_H_
