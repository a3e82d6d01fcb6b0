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

// certsmooth: command-line front end.
//
// Exit codes: 0 success, 2 configuration error, 3 protocol or file error,
// 1 anything else.

#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "certsmooth/calibration.h"
#include "certsmooth/cascade.h"
#include "certsmooth/classifier.h"
#include "certsmooth/config.h"
#include "certsmooth/error.h"
#include "certsmooth/harness.h"
#include "certsmooth/multipolicy.h"
#include "certsmooth/noise_io.h"
#include "certsmooth/smoothing.h"
#include "certsmooth/stats.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using certsmooth::ErrorCode;
using certsmooth::Fail;
using certsmooth::Label;
using certsmooth::RunConfig;
using Json = nlohmann::ordered_json;

constexpr int kExitConfig = 2;
constexpr int kExitProtocol = 3;

// Flags shared by the run subcommands. Only flags given on the command line
// override the config file.
struct CommonFlags {
  std::string config_path;
  double sigma = 0.0;
  std::vector<double> sigmas;
  double p0 = 0.0;
  double alpha = 0.0;
  int64_t n = 0;
  int64_t n0 = 0;
  uint64_t seed = 0;
  std::string out;
  std::string classifier;
  std::string dataset;
  std::string method;
  int threads = 0;
  bool timing = false;
  double eps_max = 0.0;
  double eps_step = 0.0;
  double sigma0 = 0.0;
  double sigma1 = 0.0;
  std::vector<double> x;
  int label = -1;

  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>>
      overrides;
  CLI::Option* threads_opt = nullptr;
};

void AddCommon(CLI::App* app, CommonFlags& f, bool with_method) {
  auto add = [&](CLI::Option* opt, std::function<void(RunConfig&)> apply) {
    f.overrides.emplace_back(opt, std::move(apply));
  };
  app->add_option("--config", f.config_path, "JSON run config");
  add(app->add_option("--sigma", f.sigma, "single smoothing scale"),
      [&f](RunConfig& c) { c.sigmas = {f.sigma}; });
  add(app->add_option("--sigmas", f.sigmas, "comma-separated scales")
          ->delimiter(','),
      [&f](RunConfig& c) { c.sigmas = f.sigmas; });
  add(app->add_option("--p0", f.p0, "abstention threshold"),
      [&f](RunConfig& c) { c.p0 = f.p0; });
  add(app->add_option("--alpha", f.alpha, "significance level"),
      [&f](RunConfig& c) { c.alpha = f.alpha; });
  add(app->add_option("--n", f.n, "estimation draws"),
      [&f](RunConfig& c) { c.n = f.n; });
  add(app->add_option("--n0", f.n0, "selection draws"),
      [&f](RunConfig& c) { c.n0 = f.n0; });
  add(app->add_option("--seed", f.seed, "noise seed"),
      [&f](RunConfig& c) { c.seed = f.seed; });
  add(app->add_option("--out", f.out, "output directory"),
      [&f](RunConfig& c) { c.out_dir = f.out; });
  add(app->add_option("--classifier", f.classifier, "classifier JSON"),
      [&f](RunConfig& c) { c.classifier_path = f.classifier; });
  add(app->add_option("--dataset", f.dataset, "dataset spec JSON"),
      [&f](RunConfig& c) { c.dataset_path = f.dataset; });
  f.threads_opt =
      app->add_option("--threads", f.threads, "worker threads (0: default)");
  add(f.threads_opt, [&f](RunConfig& c) { c.threads = f.threads; });
  add(app->add_flag("--timing", f.timing, "record wall time per sample"),
      [&f](RunConfig& c) { c.timing = f.timing; });
  add(app->add_option("--eps-max", f.eps_max, "largest radius on the curve"),
      [&f](RunConfig& c) { c.grid.stop = f.eps_max; });
  add(app->add_option("--eps-step", f.eps_step, "radius grid step"),
      [&f](RunConfig& c) { c.grid.step = f.eps_step; });
  add(app->add_option("--sigma0", f.sigma0, "focal off-mask scale"),
      [&f](RunConfig& c) { c.focal_sigma0 = f.sigma0; });
  add(app->add_option("--sigma1", f.sigma1, "focal on-mask scale"),
      [&f](RunConfig& c) { c.focal_sigma1 = f.sigma1; });
  if (with_method) {
    add(app->add_option("--method", f.method,
                        "single | cascade | maxradius | focal"),
        [&f](RunConfig& c) { c.method = certsmooth::ParseMethod(f.method); });
  }
  app->add_option("--x", f.x, "certify this one point instead of a dataset")
      ->delimiter(',');
  app->add_option("--label", f.label, "true label of --x");
}

// Config file, then explicit flags, then CERTSMOOTH_THREADS if --threads was
// not given. `fixed` pins the method for the per-method subcommands.
RunConfig Resolve(const CommonFlags& f,
                  std::optional<certsmooth::Method> fixed) {
  RunConfig c;
  if (!f.config_path.empty()) c = certsmooth::LoadRunConfig(f.config_path);
  if (fixed) c.method = *fixed;
  for (const auto& [opt, apply] : f.overrides) {
    if (opt->count() > 0) apply(c);
  }
  const char* env = std::getenv("CERTSMOOTH_THREADS");
  if (env != nullptr && f.threads_opt->count() == 0) {
    try {
      c.threads = std::stoi(env);
    } catch (const std::exception&) {
      Fail(ErrorCode::kInvalidArgument, "CERTSMOOTH_THREADS must be an integer");
    }
  }
  c.Validate();
  if (c.threads > 0) omp_set_num_threads(c.threads);
  return c;
}

nlohmann::json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kInvalidArgument, path + " is not valid JSON: " + e.what());
  }
}

certsmooth::MixtureSpec LoadMixture(const RunConfig& c) {
  if (c.dataset_path.empty()) return certsmooth::DefaultMixture();
  return certsmooth::MixtureFromJson(ReadJsonFile(c.dataset_path));
}

std::unique_ptr<certsmooth::Classifier> LoadClassifier(
    const RunConfig& c, const certsmooth::MixtureSpec& mixture) {
  if (c.classifier_path.empty()) {
    return std::make_unique<certsmooth::LinearClassifier>(
        certsmooth::LinearClassifier::NearestCentroid(mixture.means));
  }
  return certsmooth::ClassifierFromJson(ReadJsonFile(c.classifier_path));
}

void WriteJson(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIo, "cannot open " + path.string());
  out << j.dump(2) << '\n';
  if (!out) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

void EnsureDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create " + dir + ": " + ec.message());
}

Json LabelJson(Label l) {
  return l == certsmooth::kAbstain ? Json("abstain") : Json(l);
}

// Dataset run: records.csv, summary.json and curve.svg under the output dir.
int RunDataset(const RunConfig& c) {
  const certsmooth::MixtureSpec mixture = LoadMixture(c);
  const auto classifier = LoadClassifier(c, mixture);
  const certsmooth::SyntheticDataset data = certsmooth::GenerateDataset(mixture);
  const certsmooth::BatchResult result =
      certsmooth::RunBatch(data, *classifier, c.ToBatchConfig());

  EnsureDir(c.out_dir);
  const fs::path out(c.out_dir);
  certsmooth::WriteRecordsCsv(out / "records.csv", result.records);
  Json summary;
  summary["schema"] = "certsmooth.summary/1";
  summary["config"] = certsmooth::RunConfigToJson(c);
  summary["dataset"] = certsmooth::MixtureToJson(mixture);
  summary["metrics"] = certsmooth::SummaryToJson(result.summary);
  WriteJson(out / "summary.json", summary);
  const std::vector<certsmooth::CurveSeries> series = {
      {certsmooth::MethodName(c.method), result.summary.epsilons,
       result.summary.certified_accuracy}};
  certsmooth::WriteCurveSvg(out / "curve.svg", series);

  std::printf("%s: %zu samples, certified accuracy at 0 = %.4f, ACR = %.4f\n",
              certsmooth::MethodName(c.method).c_str(), data.size(),
              result.summary.certified_accuracy.front(), result.summary.acr);
  std::printf("wrote %s\n", out.string().c_str());
  return 0;
}

// Single-point query: prints a JSON record to stdout.
int RunPoint(const RunConfig& c, const CommonFlags& f) {
  const certsmooth::MixtureSpec mixture = LoadMixture(c);
  const auto classifier = LoadClassifier(c, mixture);
  const std::span<const double> x(f.x);
  Json out;
  out["config"] = certsmooth::RunConfigToJson(c);
  switch (c.method) {
    case certsmooth::Method::kSingle: {
      const certsmooth::CertifyParams p{c.sigmas.front(), c.n0, c.n, c.alpha,
                                        c.p0};
      const auto r = certsmooth::Certify(*classifier, x, p, c.seed);
      out["prediction"] = LabelJson(r.prediction);
      out["radius"] = r.radius;
      out["p_lower"] = r.p_lower;
      out["counts"] = r.estimation.counts;
      break;
    }
    case certsmooth::Method::kCascade: {
      certsmooth::CascadeConfig cc{c.sigmas, c.p0, c.alpha, c.n, c.n0, c.seed};
      out["trace"] = certsmooth::CascadeTraceToJson(
          certsmooth::CascadePredictCertify(*classifier, x, cc));
      break;
    }
    default: {
      certsmooth::BatchConfig b = c.ToBatchConfig();
      const auto r = certsmooth::EvaluateSample(
          *classifier, x, f.label >= 0 ? f.label : 0, 0, b);
      out["prediction"] = LabelJson(r.prediction);
      out["radius"] = r.radius;
      out["p_lower"] = r.p_lower;
      break;
    }
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

int RunMethod(const CommonFlags& f, certsmooth::Method method) {
  const RunConfig c = Resolve(f, method);
  return f.x.empty() ? RunDataset(c) : RunPoint(c, f);
}

// ---------------------------------------------------------------------------
// focal --a / --p

struct FocalFlags {
  std::vector<double> a;
  double t2 = 0.0;
  std::vector<double> p;
  double step = certsmooth::kFocalGridStep;
  double tol = certsmooth::kFocalTolerance;
};

std::string FormatVector(const std::vector<double>& v) {
  std::string s = "(";
  for (size_t i = 0; i < v.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v[i]);
    if (i) s += ", ";
    s += buf;
  }
  return s + ")";
}

int RunFocalSolver(const FocalFlags& ff, const CommonFlags& f) {
  if (!ff.a.empty()) {
    const auto inst = certsmooth::FocalInstance::FromMargins(ff.a, ff.t2);
    const auto s = certsmooth::FocalOptimize(inst, ff.step, ff.tol);
    std::printf("b*=%s, R*=%.5f\n", FormatVector(s.b).c_str(), s.radius);
    return 0;
  }
  const RunConfig c = Resolve(f, certsmooth::Method::kFocal);
  const auto cert = certsmooth::FocalCertify(ff.p, c.focal_sigma0,
                                             c.focal_sigma1, ff.step, ff.tol);
  if (cert.abstained) {
    std::printf("abstain (mean confidence %.5f)\n", cert.mean_confidence);
  } else {
    std::printf("b*=%s, R*=%.5f\n", FormatVector(cert.solution.b).c_str(),
                cert.radius);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// losses

struct LossFlags {
  std::string input;
  double lambda = certsmooth::kDefaultLambda;
  double alpha_w = certsmooth::kDefaultAlphaWeight;
  double p0 = 0.5;
  double denoiser_loss = 0.0;
};

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

// CSV: role,label,p_0,...,p_{C-1}. Rows with role "noisy" form the Brier
// batch; the i-th "pair1" row is matched with the i-th "pair2" row.
int RunLosses(const LossFlags& lf) {
  std::ifstream in(lf.input);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + lf.input);
  std::string line;
  if (!std::getline(in, line)) Fail(ErrorCode::kProtocol, "empty loss input");
  const auto header = SplitCsv(line);
  if (header.size() < 4 || header[0] != "role" || header[1] != "label") {
    Fail(ErrorCode::kProtocol, "loss input header must be role,label,p_0,...");
  }
  const size_t classes = header.size() - 2;
  std::vector<certsmooth::SoftPrediction> noisy, pair1, pair2;
  std::optional<Label> noisy_label;
  std::vector<Label> pair_labels;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = SplitCsv(line);
    if (cells.size() != header.size()) {
      Fail(ErrorCode::kProtocol,
           "line " + std::to_string(line_no) + " has the wrong column count");
    }
    Label y;
    certsmooth::SoftPrediction p(classes);
    try {
      y = std::stoi(cells[1]);
      for (size_t c = 0; c < classes; ++c) p[c] = std::stod(cells[c + 2]);
    } catch (const std::exception&) {
      Fail(ErrorCode::kProtocol, "line " + std::to_string(line_no) +
                                     " has a non-numeric field");
    }
    certsmooth::ValidateSoftPrediction(p);
    if (cells[0] == "noisy") {
      if (noisy_label && *noisy_label != y) {
        Fail(ErrorCode::kProtocol, "noisy rows must share one label");
      }
      noisy_label = y;
      noisy.push_back(std::move(p));
    } else if (cells[0] == "pair1") {
      pair1.push_back(std::move(p));
      pair_labels.push_back(y);
    } else if (cells[0] == "pair2") {
      pair2.push_back(std::move(p));
    } else {
      Fail(ErrorCode::kProtocol, "unknown role '" + cells[0] + "'");
    }
  }
  if (pair1.size() != pair2.size()) {
    Fail(ErrorCode::kProtocol, "pair1 and pair2 rows must match up");
  }

  Json out;
  double brier = 0.0;
  if (!noisy.empty()) {
    const auto b = certsmooth::BrierLoss(noisy, *noisy_label, lf.p0);
    brier = b.value;
    out["brier"] = b.value;
    out["brier_gradient"] = b.gradient;
    out["brier_mask"] = b.mask;
  } else {
    out["brier"] = 0.0;
  }
  double ac = 0.0;
  Json ac_grads = Json::array();
  for (size_t i = 0; i < pair1.size(); ++i) {
    const auto r = certsmooth::AntiConsistencyLoss(pair1[i], pair2[i],
                                                   pair_labels[i]);
    ac += r.value / static_cast<double>(pair1.size());
    ac_grads.push_back({{"grad_p1", r.grad_p1},
                        {"grad_p2", r.grad_p2},
                        {"active", r.active}});
  }
  out["ac"] = ac;
  out["ac_terms"] = ac_grads;
  out["lambda"] = lf.lambda;
  out["alpha_w"] = lf.alpha_w;
  out["total"] = certsmooth::TotalObjective(lf.denoiser_loss, brier, ac,
                                            lf.lambda, lf.alpha_w);
  std::cout << out.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// scan-sigma

struct ScanFlags {
  double lo = 0.0;
  double hi = 2.0;
  double step = 0.01;
  int64_t n = 0;
};

int RunScan(const CommonFlags& f, const ScanFlags& sf) {
  const RunConfig c = Resolve(f, std::nullopt);
  const certsmooth::MixtureSpec mixture = LoadMixture(c);
  const auto classifier = LoadClassifier(c, mixture);
  certsmooth::ScanOptions opt;
  opt.sigma_lo = sf.lo;
  opt.sigma_hi = sf.hi;
  opt.step = sf.step;
  opt.n = sf.n;
  opt.seed = c.seed;
  if (!f.x.empty()) {
    if (f.label < 0) Fail(ErrorCode::kInvalidArgument, "--x needs --label");
    const auto r = certsmooth::CriticalSigmaScan(*classifier, f.x, f.label, opt);
    Json out;
    out["critical_sigma"] = r.above_range ? Json(nullptr) : Json(r.sigma);
    out["above_range"] = r.above_range;
    std::cout << out.dump(2) << '\n';
    return 0;
  }
  const auto data = certsmooth::GenerateDataset(mixture);
  EnsureDir(c.out_dir);
  std::string csv = "sample_id,true_label,critical_sigma\n";
  for (size_t i = 0; i < data.size(); ++i) {
    opt.sample_id = i;
    const auto r = certsmooth::CriticalSigmaScan(*classifier, data.points[i],
                                                 data.labels[i], opt);
    // Points whose confidence never drops are written as ">sigma_hi".
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%zu,%d,%s%.10g\n", i, data.labels[i],
                  r.above_range ? ">" : "", r.sigma);
    csv += buf;
  }
  const fs::path path = fs::path(c.out_dir) / "critical_sigma.csv";
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIo, "cannot open " + path.string());
  out << csv;
  std::printf("wrote %s\n", path.string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// emit-noise / ingest

struct NoiseFlags {
  std::vector<double> x;
  double sigma = 0.25;
  uint64_t n = 0;
  uint64_t seed = 0;
  uint64_t sample_id = 0;
  uint32_t stage = 0;
  std::string phase = "estimate";
  std::string out;
};

certsmooth::Phase ParsePhase(const std::string& s) {
  if (s == "select") return certsmooth::Phase::kSelect;
  if (s == "estimate") return certsmooth::Phase::kEstimate;
  Fail(ErrorCode::kInvalidArgument, "phase must be select or estimate");
}

int RunEmit(const NoiseFlags& nf) {
  if (nf.x.empty()) Fail(ErrorCode::kInvalidArgument, "--x is required");
  if (!(nf.sigma >= 0.0)) Fail(ErrorCode::kInvalidArgument, "sigma must be >= 0");
  certsmooth::NoiseBatchSpec spec;
  spec.sample_id = nf.sample_id;
  spec.sigma = nf.sigma;
  spec.n = nf.n;
  spec.seed = nf.seed;
  spec.dim = static_cast<uint32_t>(nf.x.size());
  spec.stream = certsmooth::StreamTag(nf.stage, ParsePhase(nf.phase));
  certsmooth::EmitNoiseBatch(spec, nf.x, nf.out);
  std::printf("wrote %s (%llu rows)\n", nf.out.c_str(),
              static_cast<unsigned long long>(nf.n));
  return 0;
}

struct IngestFlags {
  std::string noise;
  std::string predictions;
  std::string select_noise;
  std::string select_predictions;
  int classes = 0;
  double alpha = 0.001;
  double p0 = 0.5;
};

certsmooth::VoteHistogram IngestHistogram(const std::string& noise_path,
                                          const std::string& pred_path,
                                          int classes) {
  const certsmooth::NoiseBatch batch = certsmooth::ReadNoiseBatch(noise_path);
  const auto labels =
      certsmooth::IngestPredictions(batch.spec, classes, pred_path);
  certsmooth::VoteHistogram h;
  h.counts.assign(classes, 0);
  for (Label l : labels) ++h.counts[l];
  h.n = static_cast<int64_t>(labels.size());
  h.sigma = batch.spec.sigma;
  h.key = batch.spec.key();
  return h;
}

int RunIngest(const IngestFlags& inf) {
  if (inf.classes < 2) Fail(ErrorCode::kInvalidArgument, "--classes must be >= 2");
  const auto est = IngestHistogram(inf.noise, inf.predictions, inf.classes);
  Json out;
  out["counts"] = est.counts;
  out["n"] = est.n;
  out["sigma"] = est.sigma;
  if (!inf.select_noise.empty()) {
    const auto sel =
        IngestHistogram(inf.select_noise, inf.select_predictions, inf.classes);
    if (sel.key.stream == est.key.stream && sel.key.seed == est.key.seed &&
        sel.key.sample_id == est.key.sample_id) {
      Fail(ErrorCode::kProtocol,
           "selection and estimation batches must use different streams");
    }
    certsmooth::CertifyParams p;
    p.sigma = est.sigma;
    p.n0 = sel.n;
    p.n = est.n;
    p.alpha = inf.alpha;
    p.p0 = inf.p0;
    const auto r = certsmooth::CertifyFromHistograms(sel, est, p);
    out["prediction"] = LabelJson(r.prediction);
    out["radius"] = r.radius;
    out["p_lower"] = r.p_lower;
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kProtocol:
    case ErrorCode::kIo:
      return kExitProtocol;
    default:
      return kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certsmooth: certified multi-scale randomized smoothing"};
  app.require_subcommand(1);

  CommonFlags certify_f, cascade_f, maxr_f, focal_f, eval_f, scan_f;
  auto* certify = app.add_subcommand("certify", "single-scale CERTIFY");
  AddCommon(certify, certify_f, false);
  auto* cascade = app.add_subcommand("cascade", "cascaded smoothing");
  AddCommon(cascade, cascade_f, false);
  auto* maxr = app.add_subcommand("maxradius", "max-radius policy");
  AddCommon(maxr, maxr_f, false);

  auto* focal = app.add_subcommand("focal", "focal smoothing");
  AddCommon(focal, focal_f, false);
  FocalFlags ff;
  focal->add_option("--a", ff.a, "solve the radius program for margins a")
      ->delimiter(',');
  focal->add_option("--t2", ff.t2, "t^2 = sigma0^2 / sigma1^2 - 1");
  focal->add_option("--p", ff.p, "per-mask confidences to certify")
      ->delimiter(',');
  focal->add_option("--grid-step", ff.step, "budget grid step");
  focal->add_option("--tol", ff.tol, "simplex tolerance");

  auto* eval = app.add_subcommand("eval", "dataset run with the config's method");
  AddCommon(eval, eval_f, true);

  auto* losses = app.add_subcommand("losses", "calibration losses on a CSV");
  LossFlags lf;
  losses->add_option("--input", lf.input, "CSV of soft predictions")->required();
  losses->add_option("--lambda", lf.lambda, "regularizer weight");
  losses->add_option("--alpha-w", lf.alpha_w, "anti-consistency weight");
  losses->add_option("--p0", lf.p0, "Brier mask threshold");
  losses->add_option("--denoiser-loss", lf.denoiser_loss, "base loss value");

  auto* scan = app.add_subcommand("scan-sigma", "critical sigma scan");
  AddCommon(scan, scan_f, false);
  ScanFlags sf;
  scan->add_option("--sigma-lo", sf.lo, "scan start");
  scan->add_option("--sigma-hi", sf.hi, "scan end");
  scan->add_option("--step", sf.step, "scan step");
  scan->add_option("--draws", sf.n, "Monte-Carlo draws (0: exact)");

  auto* emit = app.add_subcommand("emit-noise", "write a noise batch");
  NoiseFlags nf;
  emit->add_option("--x", nf.x, "clean point")->delimiter(',')->required();
  emit->add_option("--sigma", nf.sigma, "noise scale");
  emit->add_option("--n", nf.n, "rows")->required();
  emit->add_option("--seed", nf.seed, "noise seed");
  emit->add_option("--sample-id", nf.sample_id, "sample id");
  emit->add_option("--stage", nf.stage, "stage index of the stream");
  emit->add_option("--phase", nf.phase, "select | estimate");
  emit->add_option("--out", nf.out, "output file")->required();

  auto* ingest = app.add_subcommand("ingest", "read external predictions");
  IngestFlags inf;
  ingest->add_option("--noise", inf.noise, "emitted noise batch")->required();
  ingest->add_option("--predictions", inf.predictions, "prediction dump")
      ->required();
  ingest->add_option("--select-noise", inf.select_noise,
                     "selection batch (enables certification)");
  ingest->add_option("--select-predictions", inf.select_predictions,
                     "selection predictions");
  ingest->add_option("--classes", inf.classes, "number of classes")->required();
  ingest->add_option("--alpha", inf.alpha, "significance level");
  ingest->add_option("--p0", inf.p0, "abstention threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*certify) return RunMethod(certify_f, certsmooth::Method::kSingle);
    if (*cascade) return RunMethod(cascade_f, certsmooth::Method::kCascade);
    if (*maxr) return RunMethod(maxr_f, certsmooth::Method::kMaxRadius);
    if (*focal) {
      if (!ff.a.empty() || !ff.p.empty()) return RunFocalSolver(ff, focal_f);
      return RunMethod(focal_f, certsmooth::Method::kFocal);
    }
    if (*eval) {
      const RunConfig c = Resolve(eval_f, std::nullopt);
      return eval_f.x.empty() ? RunDataset(c) : RunPoint(c, eval_f);
    }
    if (*losses) return RunLosses(lf);
    if (*scan) return RunScan(scan_f, sf);
    if (*emit) return RunEmit(nf);
    if (*ingest) return RunIngest(inf);
  } catch (const certsmooth::Error& e) {
    std::fprintf(stderr, "certsmooth: %s\n", e.what());
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "certsmooth: %s\n", e.what());
    return 1;
  }
  return 0;
}
