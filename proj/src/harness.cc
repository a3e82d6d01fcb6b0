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

#include "certsmooth/harness.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>

#include "certsmooth/cascade.h"
#include "certsmooth/error.h"
#include "certsmooth/multipolicy.h"
#include "certsmooth/philox.h"
#include "certsmooth/smoothing.h"
#include "certsmooth/stats.h"

namespace certsmooth {
namespace {

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot open " + path.string());
  out << text;
  if (!out) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace

// ---------------------------------------------------------------------------
// Metrics

double CertifiedAccuracy(std::span<const EvalRecord> records, double epsilon) {
  if (records.empty()) return 0.0;
  int64_t hits = 0;
  for (const EvalRecord& r : records) {
    if (r.correct() && r.radius > epsilon) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

double AverageCertifiedRadius(std::span<const EvalRecord> records) {
  if (records.empty()) return 0.0;
  double total = 0.0;
  for (const EvalRecord& r : records) {
    if (r.correct()) total += r.radius;
  }
  return total / static_cast<double>(records.size());
}

double EmpiricalAccuracy(std::span<const EvalRecord> records,
                         const std::vector<bool>& clean_correct) {
  Require(records.size() == clean_correct.size(),
          "one clean-correctness flag per record is required");
  if (records.empty()) return 0.0;
  int64_t hits = 0;
  for (size_t i = 0; i < records.size(); ++i) {
    const EvalRecord& r = records[i];
    if (r.correct() || (r.prediction == kAbstain && clean_correct[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

std::vector<double> EpsilonGrid::Values() const {
  Require(step > 0.0 && stop >= start && start >= 0.0,
          "epsilon grid needs 0 <= start <= stop and step > 0");
  std::vector<double> out;
  const auto count = static_cast<int64_t>(std::floor((stop - start) / step + 1e-9));
  for (int64_t i = 0; i <= count; ++i) {
    out.push_back(start + static_cast<double>(i) * step);
  }
  return out;
}

std::vector<double> CertifiedAccuracyCurve(std::span<const EvalRecord> records,
                                           std::span<const double> epsilons) {
  std::vector<double> out;
  out.reserve(epsilons.size());
  for (double e : epsilons) out.push_back(CertifiedAccuracy(records, e));
  return out;
}

double CertifiedAccuracyIntegral(std::span<const EvalRecord> records) {
  if (records.empty()) return 0.0;
  std::vector<double> radii;
  for (const EvalRecord& r : records) {
    if (r.correct() && r.radius > 0.0) radii.push_back(r.radius);
  }
  std::sort(radii.begin(), radii.end());
  // On [r_(j-1), r_(j)) the curve counts the radii from index j on.
  const double n = static_cast<double>(records.size());
  double area = 0.0;
  double prev = 0.0;
  for (size_t j = 0; j < radii.size(); ++j) {
    const double above = static_cast<double>(radii.size() - j);
    area += above / n * (radii[j] - prev);
    prev = radii[j];
  }
  return area;
}

SummaryMetrics Summarize(std::span<const EvalRecord> records,
                         const std::vector<bool>& clean_correct,
                         const EpsilonGrid& grid, double p0) {
  Require(!records.empty(), "cannot summarize an empty run");
  SummaryMetrics s;
  s.epsilons = grid.Values();
  s.certified_accuracy = CertifiedAccuracyCurve(records, s.epsilons);
  for (size_t i = 1; i < s.certified_accuracy.size(); ++i) {
    if (s.certified_accuracy[i] > s.certified_accuracy[i - 1]) {
      Fail(ErrorCode::kDomainError, "certified accuracy curve is not monotone");
    }
  }
  s.acr = AverageCertifiedRadius(records);
  s.empirical_accuracy = EmpiricalAccuracy(records, clean_correct);
  int64_t abstained = 0;
  std::vector<ErrorRecord> errors;
  errors.reserve(records.size());
  for (const EvalRecord& r : records) {
    if (r.prediction == kAbstain) ++abstained;
    errors.push_back({r.correct(), r.p_lower});
  }
  s.abstention_rate =
      static_cast<double>(abstained) / static_cast<double>(records.size());
  s.errors = DecomposeErrors(errors, p0);
  return s;
}

// ---------------------------------------------------------------------------
// Synthetic data

void MixtureSpec::Validate() const {
  Require(dim >= 1, "mixture dimension must be >= 1");
  Require(means.size() >= 2, "mixture needs at least two classes");
  Require(stddevs.size() == means.size(), "one stddev per class is required");
  for (const auto& m : means) {
    Require(static_cast<int>(m.size()) == dim, "mean has the wrong dimension");
  }
  for (double s : stddevs) Require(s >= 0.0, "stddev must be >= 0");
  Require(count >= 1, "dataset size must be >= 1");
}

MixtureSpec DefaultMixture() {
  MixtureSpec spec;
  spec.dim = 2;
  spec.means = {{0.0, 0.0}, {0.4, 0.0}, {0.2, 1.0}, {0.2, -4.0}};
  spec.stddevs = {0.06, 0.06, 0.15, 0.5};
  spec.count = 1000;
  spec.seed = 2026;
  return spec;
}

MixtureSpec MixtureFromJson(const nlohmann::json& doc) {
  MixtureSpec spec;
  try {
    spec.dim = doc.at("dim").get<int>();
    spec.means = doc.at("means").get<std::vector<std::vector<double>>>();
    spec.stddevs = doc.at("stddevs").get<std::vector<double>>();
    spec.count = doc.value("count", int64_t{1000});
    spec.seed = doc.value("seed", uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kInvalidArgument, std::string("bad dataset spec: ") + e.what());
  }
  spec.Validate();
  return spec;
}

nlohmann::ordered_json MixtureToJson(const MixtureSpec& spec) {
  nlohmann::ordered_json j;
  j["kind"] = "gaussian_mixture";
  j["dim"] = spec.dim;
  j["means"] = spec.means;
  j["stddevs"] = spec.stddevs;
  j["count"] = spec.count;
  j["seed"] = spec.seed;
  return j;
}

std::vector<double> ClassMargins(const MixtureSpec& spec) {
  spec.Validate();
  std::vector<double> out;
  for (size_t i = 0; i < spec.means.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < spec.means.size(); ++j) {
      if (i == j) continue;
      double d2 = 0.0;
      for (int d = 0; d < spec.dim; ++d) {
        const double diff = spec.means[i][d] - spec.means[j][d];
        d2 += diff * diff;
      }
      best = std::min(best, 0.5 * std::sqrt(d2));
    }
    out.push_back(best);
  }
  return out;
}

SyntheticDataset GenerateDataset(const MixtureSpec& spec) {
  spec.Validate();
  SyntheticDataset data;
  data.spec = spec;
  const int classes = spec.num_classes();
  // Class labels and points come from separate counter streams, so each
  // point depends only on (seed, index).
  const Philox4x32 label_gen(
      {static_cast<uint32_t>(spec.seed), static_cast<uint32_t>(spec.seed >> 32)});
  for (int64_t i = 0; i < spec.count; ++i) {
    const auto out = label_gen(
        {static_cast<uint32_t>(i), static_cast<uint32_t>(static_cast<uint64_t>(i) >> 32),
         0x4C41424Cu, 0});
    const Label y = static_cast<Label>(out[0] % static_cast<uint32_t>(classes));
    NoiseKey key{spec.seed, static_cast<uint64_t>(i), 0xD47Au};
    std::vector<double> eps(spec.dim);
    NoiseStream(key).Fill(0, eps);
    std::vector<double> point(spec.dim);
    for (int d = 0; d < spec.dim; ++d) {
      point[d] = spec.means[y][d] + spec.stddevs[y] * eps[d];
    }
    data.points.push_back(std::move(point));
    data.labels.push_back(y);
  }
  return data;
}

// ---------------------------------------------------------------------------
// Critical sigma

CriticalSigma CriticalSigmaScan(const Classifier& classifier,
                                std::span<const double> x, Label y,
                                const ScanOptions& options) {
  Require(options.step > 0.0, "scan step must be positive");
  Require(options.sigma_lo >= 0.0 && options.sigma_hi >= options.sigma_lo,
          "scan range must satisfy 0 <= sigma_lo <= sigma_hi");
  Require(y >= 0 && y < classifier.num_classes(), "label out of range");
  Require(options.n >= 0, "scan sample count must be >= 0");
  if (options.n == 0) {
    Require(classifier.HasExactConfidences(),
            "exact scan needs a classifier with exact confidences");
  }
  const auto steps = static_cast<int64_t>(
      std::floor((options.sigma_hi - options.sigma_lo) / options.step + 1e-9));
  for (int64_t i = 0; i <= steps; ++i) {
    const double sigma = options.sigma_lo + static_cast<double>(i) * options.step;
    double conf;
    if (sigma == 0.0) {
      conf = classifier.Classify(x) == y ? 1.0 : 0.0;
    } else if (options.n == 0) {
      conf = classifier.ExactConfidence(x, sigma, y);
    } else {
      const NoiseKey key{options.seed, options.sample_id,
                         StreamTag(static_cast<uint32_t>(i), Phase::kEstimate)};
      const VoteHistogram h = SampleVotes(classifier, x, sigma, options.n, key);
      conf = static_cast<double>(h.counts[y]) / static_cast<double>(options.n);
    }
    if (conf < 0.5) return {sigma, false};
  }
  return {options.sigma_hi, true};
}

// ---------------------------------------------------------------------------
// Batch runs

std::string MethodName(Method method) {
  switch (method) {
    case Method::kSingle:
      return "single";
    case Method::kCascade:
      return "cascade";
    case Method::kMaxRadius:
      return "maxradius";
    case Method::kFocal:
      return "focal";
  }
  return "unknown";
}

Method ParseMethod(const std::string& name) {
  if (name == "single") return Method::kSingle;
  if (name == "cascade") return Method::kCascade;
  if (name == "maxradius") return Method::kMaxRadius;
  if (name == "focal") return Method::kFocal;
  Fail(ErrorCode::kInvalidArgument, "unknown method '" + name + "'");
}

void BatchConfig::Validate() const {
  Require(!sigmas.empty(), "at least one sigma is required");
  for (size_t i = 0; i < sigmas.size(); ++i) {
    Require(sigmas[i] > 0.0 && std::isfinite(sigmas[i]), "sigmas must be > 0");
    if (i > 0) Require(sigmas[i] > sigmas[i - 1], "sigmas must increase");
  }
  if (method == Method::kSingle) {
    Require(sigmas.size() == 1, "single-scale runs take exactly one sigma");
  }
  Require(p0 >= 0.5 && p0 < 1.0, "p0 must lie in [0.5, 1)");
  Require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  Require(n >= 1 && n0 >= 1, "n and n0 must be >= 1");
  if (method == Method::kFocal) {
    Require(focal_sigma0 > focal_sigma1 && focal_sigma1 > 0.0,
            "focal runs need sigma0 > sigma1 > 0");
  }
  grid.Values();
}

EvalRecord EvaluateSample(const Classifier& classifier,
                          std::span<const double> x, Label y,
                          uint64_t sample_id, const BatchConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  EvalRecord rec;
  rec.sample_id = sample_id;
  rec.true_label = y;
  rec.seed = config.seed;

  switch (config.method) {
    case Method::kSingle: {
      CertifyParams params;
      params.sigma = config.sigmas.front();
      params.n0 = config.n0;
      params.n = config.n;
      params.alpha = config.alpha;
      params.p0 = config.p0;
      const CertificationResult c =
          Certify(classifier, x, params, config.seed, sample_id);
      rec.prediction = c.prediction;
      rec.radius = c.radius;
      rec.p_lower = c.p_lower;
      if (!c.abstained()) rec.halt_sigma = params.sigma;
      break;
    }
    case Method::kCascade: {
      CascadeConfig cc;
      cc.sigmas = config.sigmas;
      cc.p0 = config.p0;
      cc.alpha = config.alpha;
      cc.n = config.n;
      cc.n0 = config.n0;
      cc.seed = config.seed;
      const CascadeTrace t = CascadePredictCertify(classifier, x, cc, sample_id);
      rec.prediction = t.prediction;
      rec.radius = t.radius;
      // Halting stage if any, else the last (smallest-sigma) stage queried.
      rec.p_lower = t.stages.back().certification.p_lower;
      if (t.halt_stage) rec.halt_sigma = t.halt_sigma();
      break;
    }
    case Method::kMaxRadius: {
      std::vector<std::vector<int64_t>> counts;
      for (size_t i = 0; i < config.sigmas.size(); ++i) {
        const NoiseKey key{config.seed, sample_id,
                           StreamTag(static_cast<uint32_t>(i), Phase::kEstimate)};
        counts.push_back(
            SampleVotes(classifier, x, config.sigmas[i], config.n, key).counts);
      }
      const MaxRadiusResult m =
          MaxRadiusFromCounts(counts, config.sigmas, config.alpha);
      rec.prediction = m.prediction;
      rec.radius = m.radius;
      if (m.chosen_scale >= 0) {
        const auto& row = counts[m.chosen_scale];
        const double level =
            config.alpha / (2.0 * static_cast<double>(config.sigmas.size()));
        rec.p_lower = ClopperPearsonLower(
            row[ArgMax(std::span<const int64_t>(row))], config.n, level);
        rec.halt_sigma = config.sigmas[m.chosen_scale];
      }
      break;
    }
    case Method::kFocal: {
      const FocalMaskSet masks = FocalMaskSet::Coordinates(classifier.dim());
      std::vector<int64_t> guess_votes(classifier.num_classes(), 0);
      for (int k = 0; k < masks.size(); ++k) {
        const NoiseKey key{config.seed, sample_id,
                           StreamTag(static_cast<uint32_t>(k), Phase::kSelect)};
        const auto v = FocalVotes(classifier, x, masks, k, config.focal_sigma0,
                                  config.focal_sigma1, config.n0, key);
        for (size_t c = 0; c < v.size(); ++c) guess_votes[c] += v[c];
      }
      const Label guess = ArgMax(std::span<const int64_t>(guess_votes));
      std::vector<int64_t> successes;
      for (int k = 0; k < masks.size(); ++k) {
        const NoiseKey key{config.seed, sample_id,
                           StreamTag(static_cast<uint32_t>(k), Phase::kFocal)};
        const auto v = FocalVotes(classifier, x, masks, k, config.focal_sigma0,
                                  config.focal_sigma1, config.n, key);
        successes.push_back(v[guess]);
      }
      const FocalCertificate f = FocalCertifyFromCounts(
          successes, config.n, config.alpha, config.focal_sigma0,
          config.focal_sigma1);
      rec.p_lower = f.mean_confidence;
      if (!f.abstained) {
        rec.prediction = guess;
        rec.radius = f.radius;
      }
      break;
    }
  }
  if (rec.prediction == kAbstain) rec.radius = 0.0;
  if (config.record_timing) {
    rec.ms = std::chrono::duration<double, std::milli>(
                 std::chrono::steady_clock::now() - started)
                 .count();
  }
  return rec;
}

BatchResult RunBatch(const SyntheticDataset& dataset,
                     const Classifier& classifier, const BatchConfig& config) {
  config.Validate();
  Require(dataset.size() >= 1, "dataset is empty");
  Require(dataset.spec.dim == classifier.dim(),
          "dataset and classifier dimensions differ");
  const auto count = static_cast<int64_t>(dataset.size());
  BatchResult result;
  result.records.resize(dataset.size());
  std::vector<char> clean(dataset.size(), 0);
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic)
  for (int64_t i = 0; i < count; ++i) {
    try {
      result.records[i] = EvaluateSample(classifier, dataset.points[i],
                                         dataset.labels[i],
                                         static_cast<uint64_t>(i), config);
      clean[i] = classifier.Classify(dataset.points[i]) == dataset.labels[i];
    } catch (...) {
#pragma omp critical(certsmooth_batch_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  result.clean_correct.assign(clean.begin(), clean.end());
  result.summary = Summarize(result.records, result.clean_correct, config.grid,
                             config.p0);
  return result;
}

// ---------------------------------------------------------------------------
// Reports

std::string RecordsCsv(std::span<const EvalRecord> records) {
  std::string out = "sample_id,true_label,prediction,radius,halt_sigma,p_lower,seed,ms\n";
  for (const EvalRecord& r : records) {
    out += std::to_string(r.sample_id);
    out += ',';
    out += std::to_string(r.true_label);
    out += ',';
    out += r.prediction == kAbstain ? std::string("abstain")
                                    : std::to_string(r.prediction);
    out += ',';
    out += FormatDouble(r.radius);
    out += ',';
    if (r.halt_sigma) out += FormatDouble(*r.halt_sigma);
    out += ',';
    out += FormatDouble(r.p_lower);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += FormatDouble(r.ms);
    out += '\n';
  }
  return out;
}

void WriteRecordsCsv(const std::filesystem::path& path,
                     std::span<const EvalRecord> records) {
  WriteText(path, RecordsCsv(records));
}

nlohmann::ordered_json SummaryToJson(const SummaryMetrics& summary) {
  nlohmann::ordered_json j;
  j["acr"] = summary.acr;
  j["empirical_accuracy"] = summary.empirical_accuracy;
  j["abstention_rate"] = summary.abstention_rate;
  j["certified_accuracy"] = {{"epsilon", summary.epsilons},
                             {"accuracy", summary.certified_accuracy}};
  const ErrorDecomposition& e = summary.errors;
  j["errors"] = {{"total", e.total},
                 {"over_smoothing_count", e.over_smoothing_count},
                 {"over_confidence_count", e.over_confidence_count},
                 {"over_smoothing_rate", e.over_smoothing_rate},
                 {"over_confidence_rate", e.over_confidence_rate}};
  return j;
}

std::string CurveSvg(std::span<const CurveSeries> series) {
  constexpr double kWidth = 640, kHeight = 420;
  constexpr double kLeft = 60, kRight = 20, kTop = 20, kBottom = 50;
  constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                     "#9467bd", "#ff7f0e", "#8c564b"};
  double max_eps = 0.0;
  for (const CurveSeries& s : series) {
    Require(s.epsilons.size() == s.accuracy.size(),
            "curve series needs one accuracy per epsilon");
    if (!s.epsilons.empty()) max_eps = std::max(max_eps, s.epsilons.back());
  }
  if (max_eps <= 0.0) max_eps = 1.0;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double e) { return kLeft + pw * e / max_eps; };
  auto py = [&](double a) { return kTop + ph * (1.0 - a); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\">\n";
  svg << "<g id=\"axes\" stroke=\"black\" font-family=\"sans-serif\" "
         "font-size=\"12\">\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << py(0) << "\" x2=\""
      << px(max_eps) << "\" y2=\"" << py(0) << "\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << py(0) << "\" x2=\"" << kLeft
      << "\" y2=\"" << py(1) << "\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double e = max_eps * t / 4.0, a = t / 4.0;
    svg << "<text stroke=\"none\" x=\"" << px(e) << "\" y=\"" << py(0) + 16
        << "\" text-anchor=\"middle\">" << FormatDouble(e) << "</text>\n";
    svg << "<text stroke=\"none\" x=\"" << kLeft - 6 << "\" y=\"" << py(a) + 4
        << "\" text-anchor=\"end\">" << FormatDouble(a) << "</text>\n";
  }
  svg << "<text stroke=\"none\" x=\"" << kLeft + pw / 2 << "\" y=\""
      << kHeight - 10 << "\" text-anchor=\"middle\">radius</text>\n";
  svg << "<text stroke=\"none\" x=\"14\" y=\"" << kTop + ph / 2
      << "\" transform=\"rotate(-90 14 " << kTop + ph / 2
      << ")\" text-anchor=\"middle\">certified accuracy</text>\n";
  svg << "</g>\n<g id=\"curves\" fill=\"none\" stroke-width=\"2\">\n";
  for (size_t i = 0; i < series.size(); ++i) {
    const CurveSeries& s = series[i];
    const char* color = kColors[i % std::size(kColors)];
    svg << "<polyline data-name=\"" << s.name << "\" stroke=\"" << color
        << "\" points=\"";
    for (size_t k = 0; k < s.epsilons.size(); ++k) {
      if (k) svg << ' ';
      svg << FormatDouble(px(s.epsilons[k])) << ','
          << FormatDouble(py(s.accuracy[k]));
    }
    svg << "\"/>\n";
  }
  svg << "</g>\n<g id=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (size_t i = 0; i < series.size(); ++i) {
    const double y = kTop + 14 + 16 * static_cast<double>(i);
    svg << "<text x=\"" << kWidth - kRight - 8 << "\" y=\"" << y
        << "\" text-anchor=\"end\" fill=\"" << kColors[i % std::size(kColors)]
        << "\">" << series[i].name << "</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

void WriteCurveSvg(const std::filesystem::path& path,
                   std::span<const CurveSeries> series) {
  WriteText(path, CurveSvg(series));
}

}  // namespace certsmooth
