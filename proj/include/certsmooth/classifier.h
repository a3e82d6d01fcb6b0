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

// Base classifiers f : R^dim -> {0, ..., num_classes - 1}.
//
// Argmax ties are always broken toward the lowest class index. Analytic and
// tabular kinds also expose the exact Gaussian-smoothed class probabilities
// P_{delta ~ N(0, sigma^2 I)}[f(x + delta) = c], which tests use as ground
// truth for the Monte-Carlo machinery.

#ifndef CERTSMOOTH_CLASSIFIER_H_
#define CERTSMOOTH_CLASSIFIER_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace certsmooth {

using Label = int32_t;
inline constexpr Label kAbstain = -1;

enum class ClassifierKind { kLinear, kGrid, kExternalDump };

class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual ClassifierKind kind() const = 0;
  virtual int num_classes() const = 0;
  virtual int dim() const = 0;

  // Throws kInvalidArgument on a dimension mismatch.
  Label Classify(std::span<const double> x) const;

  // Exact smoothed probabilities for every class. Throws kUnsupported when
  // the kind (or its configuration) has no exact evaluation.
  virtual std::vector<double> ExactConfidences(std::span<const double> x,
                                               double sigma) const;
  double ExactConfidence(std::span<const double> x, double sigma,
                         Label label) const;

  virtual bool HasExactConfidences() const { return false; }

 protected:
  // x has already been checked against dim().
  virtual Label ClassifyUnchecked(std::span<const double> x) const = 0;

  void CheckPoint(std::span<const double> x) const;
};

// argmax_c (w_c . x + b_c).
class LinearClassifier final : public Classifier {
 public:
  // weights[c] has length dim; one bias per class.
  LinearClassifier(std::vector<std::vector<double>> weights,
                   std::vector<double> biases);

  // Nearest-centroid rule as a linear classifier: w_c = mu_c,
  // b_c = -|mu_c|^2 / 2.
  static LinearClassifier NearestCentroid(
      const std::vector<std::vector<double>>& centers);

  // Always predicts `label`.
  static LinearClassifier Constant(int num_classes, int dim, Label label);

  ClassifierKind kind() const override { return ClassifierKind::kLinear; }
  int num_classes() const override { return static_cast<int>(biases_.size()); }
  int dim() const override { return dim_; }

  // Closed form for two classes (any dim). More classes are supported for
  // dim <= 2: each decision region is a convex polygon whose Gaussian mass is
  // a one-dimensional integral of exact normal-CDF differences.
  std::vector<double> ExactConfidences(std::span<const double> x,
                                       double sigma) const override;
  bool HasExactConfidences() const override {
    return num_classes() == 2 || dim_ <= 2;
  }

  const std::vector<std::vector<double>>& weights() const { return weights_; }
  const std::vector<double>& biases() const { return biases_; }

 private:
  Label ClassifyUnchecked(std::span<const double> x) const override;
  double RegionMass(std::span<const double> x, double sigma, Label c) const;

  int dim_;
  std::vector<std::vector<double>> weights_;
  std::vector<double> biases_;
};

// Piecewise-constant classifier on an axis-aligned grid (dim <= 3). Axis d has
// sorted boundaries b_0 < ... < b_{m-1}, which split the line into m + 1
// half-open intervals (-inf, b_0), [b_0, b_1), ..., [b_{m-1}, inf). Labels are
// stored row-major over the cell index tuple, last axis fastest.
class GridClassifier final : public Classifier {
 public:
  GridClassifier(int num_classes, std::vector<std::vector<double>> boundaries,
                 std::vector<Label> labels);

  ClassifierKind kind() const override { return ClassifierKind::kGrid; }
  int num_classes() const override { return num_classes_; }
  int dim() const override { return static_cast<int>(boundaries_.size()); }

  // Cell masses are products of one-dimensional normal-CDF differences, so
  // this is exact up to rounding.
  std::vector<double> ExactConfidences(std::span<const double> x,
                                       double sigma) const override;
  bool HasExactConfidences() const override { return true; }

 private:
  Label ClassifyUnchecked(std::span<const double> x) const override;

  int num_classes_;
  std::vector<std::vector<double>> boundaries_;
  std::vector<Label> labels_;
};

// Labels produced by an external model for previously emitted noise batches.
// Points are matched on their float32 representation, which is what the
// external model saw.
class ExternalDumpClassifier final : public Classifier {
 public:
  ExternalDumpClassifier(int num_classes, int dim);

  ClassifierKind kind() const override { return ClassifierKind::kExternalDump; }
  int num_classes() const override { return num_classes_; }
  int dim() const override { return dim_; }

  // rows is n x dim row-major float32; labels has n entries.
  void AddPredictions(std::span<const float> rows, std::span<const Label> labels);
  size_t size() const { return table_.size(); }

 private:
  Label ClassifyUnchecked(std::span<const double> x) const override;

  int num_classes_;
  int dim_;
  std::unordered_map<std::string, Label> table_;
};

// {"kind": "linear", "weights": [[...]], "biases": [...]}
// {"kind": "nearest_centroid", "centers": [[...]]}
// {"kind": "constant", "num_classes": C, "dim": d, "label": c}
// {"kind": "grid", "num_classes": C, "boundaries": [[...]], "labels": [...]}
// {"kind": "external", "num_classes": C, "dim": d,
//  "batches": [{"noise": path, "predictions": path}, ...]}
std::unique_ptr<Classifier> ClassifierFromJson(const nlohmann::json& doc);

}  // namespace certsmooth

#endif  // CERTSMOOTH_CLASSIFIER_H_
