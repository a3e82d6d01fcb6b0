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
#include <cstring>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "certsmooth/error.h"
#include "certsmooth/noise_io.h"
#include "certsmooth/stats.h"

namespace certsmooth {
namespace {

// Phi(hi) - Phi(lo) without cancellation in the upper tail.
double NormalInterval(double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  if (lo >= 0.0) return NormalCdf(-lo) - NormalCdf(-hi);
  return NormalCdf(hi) - NormalCdf(lo);
}

void RequireSigma(double sigma) {
  Require(sigma > 0.0 && std::isfinite(sigma),
          "smoothing sigma must be positive and finite");
}

// Integration window for the standard normal; the mass outside is < 1e-32.
constexpr double kTail = 12.0;

struct HalfPlane {
  double g1;  // coefficient of u1
  double g2;  // coefficient of u2
  double h;   // constraint: g1 u1 + g2 u2 + h >= 0
};

}  // namespace

// ---------------------------------------------------------------------------
// Classifier

void Classifier::CheckPoint(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim()) {
    Fail(ErrorCode::kInvalidArgument,
         "point has dimension " + std::to_string(x.size()) +
             ", classifier expects " + std::to_string(dim()));
  }
}

Label Classifier::Classify(std::span<const double> x) const {
  CheckPoint(x);
  return ClassifyUnchecked(x);
}

std::vector<double> Classifier::ExactConfidences(std::span<const double>,
                                                 double) const {
  Fail(ErrorCode::kUnsupported,
       "exact smoothed confidences are not available for this classifier");
}

double Classifier::ExactConfidence(std::span<const double> x, double sigma,
                                   Label label) const {
  Require(label >= 0 && label < num_classes(), "class label out of range");
  return ExactConfidences(x, sigma)[label];
}

// ---------------------------------------------------------------------------
// LinearClassifier

LinearClassifier::LinearClassifier(std::vector<std::vector<double>> weights,
                                   std::vector<double> biases)
    : dim_(weights.empty() ? 0 : static_cast<int>(weights.front().size())),
      weights_(std::move(weights)),
      biases_(std::move(biases)) {
  Require(weights_.size() >= 2, "linear classifier needs at least 2 classes");
  Require(weights_.size() == biases_.size(),
          "linear classifier needs one bias per class");
  Require(dim_ >= 1, "linear classifier needs dim >= 1");
  for (const auto& w : weights_) {
    Require(static_cast<int>(w.size()) == dim_,
            "linear classifier weight rows must share one dimension");
  }
}

LinearClassifier LinearClassifier::NearestCentroid(
    const std::vector<std::vector<double>>& centers) {
  std::vector<double> biases;
  biases.reserve(centers.size());
  for (const auto& mu : centers) {
    double sq = 0.0;
    for (double v : mu) sq += v * v;
    biases.push_back(-0.5 * sq);
  }
  return LinearClassifier(centers, std::move(biases));
}

LinearClassifier LinearClassifier::Constant(int num_classes, int dim,
                                            Label label) {
  Require(label >= 0 && label < num_classes, "constant label out of range");
  std::vector<std::vector<double>> weights(
      num_classes, std::vector<double>(dim, 0.0));
  std::vector<double> biases(num_classes, 0.0);
  biases[label] = 1.0;
  return LinearClassifier(std::move(weights), std::move(biases));
}

Label LinearClassifier::ClassifyUnchecked(std::span<const double> x) const {
  Label best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < weights_.size(); ++c) {
    double score = biases_[c];
    for (int d = 0; d < dim_; ++d) score += weights_[c][d] * x[d];
    if (score > best_score) {
      best_score = score;
      best = static_cast<Label>(c);
    }
  }
  return best;
}

double LinearClassifier::RegionMass(std::span<const double> x, double sigma,
                                    Label c) const {
  // Region of class c in standardized noise u = delta / sigma: for every
  // j != c, (w_c - w_j) . (x + sigma u) + (b_c - b_j) >= 0.
  std::vector<HalfPlane> planes;
  for (int j = 0; j < num_classes(); ++j) {
    if (j == c) continue;
    double g[2] = {0.0, 0.0};
    double h = biases_[c] - biases_[j];
    bool degenerate = true;
    for (int d = 0; d < dim_; ++d) {
      const double diff = weights_[c][d] - weights_[j][d];
      h += diff * x[d];
      g[d] = sigma * diff;
      if (diff != 0.0) degenerate = false;
    }
    if (degenerate) {
      // Constant comparison; exact ties go to the lower index.
      if (h > 0.0 || (h == 0.0 && c < j)) continue;
      return 0.0;
    }
    planes.push_back({g[0], g[1], h});
  }

  // Bounds on u1 from constraints without a u2 term.
  double u1_lo = -kTail;
  double u1_hi = kTail;
  std::vector<HalfPlane> sloped;
  for (const HalfPlane& p : planes) {
    if (p.g2 == 0.0) {
      const double root = -p.h / p.g1;
      if (p.g1 > 0.0) {
        u1_lo = std::max(u1_lo, root);
      } else {
        u1_hi = std::min(u1_hi, root);
      }
    } else {
      sloped.push_back(p);
    }
  }
  if (!(u1_hi > u1_lo)) return 0.0;
  if (dim_ == 1 || sloped.empty()) return NormalInterval(u1_lo, u1_hi);

  // For fixed u1 the admissible u2 form an interval; its normal mass is a
  // smooth function of u1 between the points where two bounding lines cross.
  auto bound = [](const HalfPlane& p, double u1) {
    return -(p.h + p.g1 * u1) / p.g2;
  };
  auto integrand = [&](double u1) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (const HalfPlane& p : sloped) {
      const double b = bound(p, u1);
      if (p.g2 > 0.0) {
        lo = std::max(lo, b);
      } else {
        hi = std::min(hi, b);
      }
    }
    const double density =
        std::exp(-0.5 * u1 * u1) / std::sqrt(2.0 * std::numbers::pi);
    return density * NormalInterval(lo, hi);
  };

  std::vector<double> breaks = {u1_lo, u1_hi};
  for (size_t a = 0; a < sloped.size(); ++a) {
    for (size_t b = a + 1; b < sloped.size(); ++b) {
      const double slope = sloped[a].g1 / sloped[a].g2 -
                           sloped[b].g1 / sloped[b].g2;
      if (slope == 0.0) continue;
      const double root =
          (sloped[b].h / sloped[b].g2 - sloped[a].h / sloped[a].g2) / slope;
      if (root > u1_lo && root < u1_hi) breaks.push_back(root);
    }
  }
  std::sort(breaks.begin(), breaks.end());

  using boost::math::quadrature::gauss_kronrod;
  double mass = 0.0;
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] - breaks[i] <= 0.0) continue;
    mass += gauss_kronrod<double, 31>::integrate(integrand, breaks[i],
                                                 breaks[i + 1], 15, 1e-12);
  }
  return std::clamp(mass, 0.0, 1.0);
}

std::vector<double> LinearClassifier::ExactConfidences(
    std::span<const double> x, double sigma) const {
  CheckPoint(x);
  RequireSigma(sigma);
  if (num_classes() == 2) {
    double margin = biases_[0] - biases_[1];
    double norm_sq = 0.0;
    for (int d = 0; d < dim_; ++d) {
      const double v = weights_[0][d] - weights_[1][d];
      margin += v * x[d];
      norm_sq += v * v;
    }
    if (norm_sq == 0.0) {
      return margin >= 0.0 ? std::vector<double>{1.0, 0.0}
                           : std::vector<double>{0.0, 1.0};
    }
    const double t = margin / (sigma * std::sqrt(norm_sq));
    return {NormalCdf(t), NormalCdf(-t)};
  }
  if (dim_ > 2) {
    Fail(ErrorCode::kUnsupported,
         "exact confidences for linear classifiers with more than two classes "
         "require dim <= 2");
  }
  std::vector<double> out(num_classes());
  for (int c = 0; c < num_classes(); ++c) out[c] = RegionMass(x, sigma, c);
  return out;
}

// ---------------------------------------------------------------------------
// GridClassifier

GridClassifier::GridClassifier(int num_classes,
                               std::vector<std::vector<double>> boundaries,
                               std::vector<Label> labels)
    : num_classes_(num_classes),
      boundaries_(std::move(boundaries)),
      labels_(std::move(labels)) {
  Require(num_classes_ >= 2, "grid classifier needs at least 2 classes");
  Require(!boundaries_.empty() && boundaries_.size() <= 3,
          "grid classifier supports 1 <= dim <= 3");
  size_t cells = 1;
  for (const auto& axis : boundaries_) {
    Require(std::is_sorted(axis.begin(), axis.end()) &&
                std::adjacent_find(axis.begin(), axis.end()) == axis.end(),
            "grid boundaries must be strictly increasing");
    cells *= axis.size() + 1;
  }
  Require(labels_.size() == cells,
          "grid classifier needs one label per cell (" +
              std::to_string(cells) + ")");
  for (Label l : labels_) {
    Require(l >= 0 && l < num_classes_, "grid label out of range");
  }
}

Label GridClassifier::ClassifyUnchecked(std::span<const double> x) const {
  size_t index = 0;
  for (size_t d = 0; d < boundaries_.size(); ++d) {
    const auto& axis = boundaries_[d];
    const size_t cell = static_cast<size_t>(
        std::upper_bound(axis.begin(), axis.end(), x[d]) - axis.begin());
    index = index * (axis.size() + 1) + cell;
  }
  return labels_[index];
}

std::vector<double> GridClassifier::ExactConfidences(std::span<const double> x,
                                                     double sigma) const {
  CheckPoint(x);
  RequireSigma(sigma);
  const double inf = std::numeric_limits<double>::infinity();
  // Per-axis interval masses.
  std::vector<std::vector<double>> masses(boundaries_.size());
  for (size_t d = 0; d < boundaries_.size(); ++d) {
    const auto& axis = boundaries_[d];
    for (size_t i = 0; i <= axis.size(); ++i) {
      const double lo = i == 0 ? -inf : (axis[i - 1] - x[d]) / sigma;
      const double hi = i == axis.size() ? inf : (axis[i] - x[d]) / sigma;
      masses[d].push_back(NormalInterval(lo, hi));
    }
  }
  std::vector<double> out(num_classes_, 0.0);
  std::vector<size_t> cell(boundaries_.size(), 0);
  for (size_t index = 0; index < labels_.size(); ++index) {
    double mass = 1.0;
    for (size_t d = 0; d < boundaries_.size(); ++d) mass *= masses[d][cell[d]];
    out[labels_[index]] += mass;
    for (size_t d = boundaries_.size(); d-- > 0;) {
      if (++cell[d] < masses[d].size()) break;
      cell[d] = 0;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// ExternalDumpClassifier

namespace {

std::string RowKey(std::span<const float> row) {
  std::string key(row.size() * sizeof(float), '\0');
  std::memcpy(key.data(), row.data(), key.size());
  return key;
}

}  // namespace

ExternalDumpClassifier::ExternalDumpClassifier(int num_classes, int dim)
    : num_classes_(num_classes), dim_(dim) {
  Require(num_classes_ >= 2, "external classifier needs at least 2 classes");
  Require(dim_ >= 1, "external classifier needs dim >= 1");
}

void ExternalDumpClassifier::AddPredictions(std::span<const float> rows,
                                            std::span<const Label> labels) {
  Require(rows.size() == labels.size() * static_cast<size_t>(dim_),
          "prediction rows and labels disagree in count");
  for (size_t i = 0; i < labels.size(); ++i) {
    Require(labels[i] >= 0 && labels[i] < num_classes_,
            "external label out of range");
    table_[RowKey(rows.subspan(i * dim_, dim_))] = labels[i];
  }
}

Label ExternalDumpClassifier::ClassifyUnchecked(
    std::span<const double> x) const {
  std::vector<float> row(x.begin(), x.end());
  const auto it = table_.find(RowKey(row));
  if (it == table_.end()) {
    Fail(ErrorCode::kProtocol, "no external prediction recorded for point");
  }
  return it->second;
}

// ---------------------------------------------------------------------------
// JSON

std::unique_ptr<Classifier> ClassifierFromJson(const nlohmann::json& doc) {
  try {
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "linear") {
      return std::make_unique<LinearClassifier>(
          doc.at("weights").get<std::vector<std::vector<double>>>(),
          doc.at("biases").get<std::vector<double>>());
    }
    if (kind == "nearest_centroid") {
      return std::make_unique<LinearClassifier>(LinearClassifier::NearestCentroid(
          doc.at("centers").get<std::vector<std::vector<double>>>()));
    }
    if (kind == "constant") {
      return std::make_unique<LinearClassifier>(LinearClassifier::Constant(
          doc.at("num_classes").get<int>(), doc.at("dim").get<int>(),
          doc.at("label").get<Label>()));
    }
    if (kind == "grid") {
      return std::make_unique<GridClassifier>(
          doc.at("num_classes").get<int>(),
          doc.at("boundaries").get<std::vector<std::vector<double>>>(),
          doc.at("labels").get<std::vector<Label>>());
    }
    if (kind == "external") {
      auto external = std::make_unique<ExternalDumpClassifier>(
          doc.at("num_classes").get<int>(), doc.at("dim").get<int>());
      for (const auto& batch : doc.value("batches", nlohmann::json::array())) {
        const NoiseBatch noise =
            ReadNoiseBatch(batch.at("noise").get<std::string>());
        const std::vector<Label> labels = IngestPredictions(
            noise.spec, external->num_classes(),
            batch.at("predictions").get<std::string>());
        external->AddPredictions(noise.rows, labels);
      }
      return external;
    }
    Fail(ErrorCode::kInvalidArgument, "unknown classifier kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kInvalidArgument,
         std::string("malformed classifier definition: ") + e.what());
  }
}

}  // namespace certsmooth
