/*
 * Copyright 2026 The fedledger Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fedledger/xai.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "fedledger/kernels.h"
#include "fedledger/rng.h"

namespace fedledger {
namespace {

constexpr std::uint64_t kTagValidate = 0x76616c;
constexpr double kRidge = 1e-6;

void check_inputs(const ModelParams& params, std::span<const double> sample,
                  std::span<const Vector> background, std::size_t n_repeats) {
  if (background.empty()) throw std::invalid_argument("empty background");
  if (n_repeats == 0) throw std::invalid_argument("n_repeats must be >= 1");
  if (sample.size() != params.dim()) {
    throw std::invalid_argument("sample dimension mismatch");
  }
  for (const auto& row : background) {
    if (row.size() != params.dim()) {
      throw std::invalid_argument("background dimension mismatch");
    }
  }
}

// Collapses per-repeat attributions (repeat-major) into means and the
// stability score.
Explanation summarize(const std::vector<Vector>& per_repeat, ExplainMethod method) {
  const std::size_t d = per_repeat.front().size();
  const double r = static_cast<double>(per_repeat.size());
  Explanation e;
  e.method = method;
  e.attributions.assign(d, 0.0);
  for (const auto& row : per_repeat) kernels::add(row, e.attributions);
  kernels::scale(1.0 / r, e.attributions);

  double sum_mean = 0.0;
  double sum_std = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double var = 0.0;
    for (const auto& row : per_repeat) {
      const double diff = row[j] - e.attributions[j];
      var += diff * diff;
    }
    sum_mean += e.attributions[j];
    sum_std += std::sqrt(var / r);
  }
  const double denom = sum_mean + sum_std;
  e.stability = denom > 0.0 ? std::clamp(1.0 - sum_std / denom, 0.0, 1.0) : 1.0;
  return e;
}

// Solves (A + ridge I) x = b in place by Gaussian elimination with partial
// pivoting. A is n x n row-major.
Vector solve_ridge(std::vector<double> a, Vector b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] += kRidge;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t row = col + 1; row < n; ++row) {
      if (std::abs(a[row * n + col]) > std::abs(a[pivot * n + col])) pivot = row;
    }
    if (pivot != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[pivot * n + k]);
      std::swap(b[col], b[pivot]);
    }
    const double p = a[col * n + col];
    if (p == 0.0) continue;
    for (std::size_t row = col + 1; row < n; ++row) {
      const double f = a[row * n + col] / p;
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) a[row * n + k] -= f * a[col * n + k];
      b[row] -= f * b[col];
    }
  }
  Vector x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t k = i + 1; k < n; ++k) acc -= a[i * n + k] * x[k];
    const double p = a[i * n + i];
    x[i] = p == 0.0 ? 0.0 : acc / p;
  }
  return x;
}

}  // namespace

std::string_view to_string(ExplainMethod m) {
  return m == ExplainMethod::kPermutation ? "permutation" : "local_surrogate";
}

Explanation explain(const ModelParams& params, std::span<const double> sample,
                    std::span<const Vector> background, std::size_t n_repeats,
                    std::uint64_t seed) {
  check_inputs(params, sample, background, n_repeats);
  const std::size_t d = params.dim();
  const double base = predict(params, sample);
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, background.size() - 1);

  std::vector<Vector> per_repeat(n_repeats, Vector(d, 0.0));
  Vector probe(sample.begin(), sample.end());
  for (std::size_t r = 0; r < n_repeats; ++r) {
    for (std::size_t j = 0; j < d; ++j) {
      probe[j] = background[pick(rng)][j];
      per_repeat[r][j] = std::abs(predict(params, probe) - base);
      probe[j] = sample[j];
    }
  }
  return summarize(per_repeat, ExplainMethod::kPermutation);
}

Explanation explain_surrogate(const ModelParams& params,
                              std::span<const double> sample,
                              std::span<const Vector> background,
                              std::size_t n_repeats, std::uint64_t seed) {
  check_inputs(params, sample, background, n_repeats);
  const std::size_t d = params.dim();
  const std::size_t n = d + 1;  // intercept first
  const std::size_t draws = std::max<std::size_t>(64, 8 * n);
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, background.size() - 1);
  std::bernoulli_distribution keep(0.5);

  std::vector<Vector> per_repeat(n_repeats);
  Vector probe(d);
  Vector z(n);
  for (std::size_t r = 0; r < n_repeats; ++r) {
    std::vector<double> gram(n * n, 0.0);
    Vector rhs(n, 0.0);
    for (std::size_t t = 0; t < draws; ++t) {
      const Vector& row = background[pick(rng)];
      z[0] = 1.0;
      for (std::size_t j = 0; j < d; ++j) {
        const bool kept = keep(rng);
        z[j + 1] = kept ? 1.0 : 0.0;
        probe[j] = kept ? sample[j] : row[j];
      }
      const double y = predict(params, probe);
      for (std::size_t a = 0; a < n; ++a) {
        if (z[a] == 0.0) continue;
        rhs[a] += y;
        for (std::size_t b = 0; b < n; ++b) gram[a * n + b] += z[b];
      }
    }
    Vector coef = solve_ridge(std::move(gram), std::move(rhs), n);
    per_repeat[r].resize(d);
    for (std::size_t j = 0; j < d; ++j) per_repeat[r][j] = std::abs(coef[j + 1]);
  }
  return summarize(per_repeat, ExplainMethod::kLocalSurrogate);
}

Explanation explain_with(const ModelParams& params, std::span<const double> sample,
                         std::span<const Vector> background,
                         const ExplainConfig& cfg) {
  return cfg.method == ExplainMethod::kPermutation
             ? explain(params, sample, background, cfg.n_repeats, cfg.seed)
             : explain_surrogate(params, sample, background, cfg.n_repeats, cfg.seed);
}

std::size_t top_feature(const Explanation& e) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < e.attributions.size(); ++j) {
    if (std::abs(e.attributions[j]) > std::abs(e.attributions[best])) best = j;
  }
  return best;
}

ValidationReport validate_predictions(const ModelParams& model1,
                                      const ModelParams& model2,
                                      std::span<const Sample> samples,
                                      const ExplainConfig& cfg) {
  if (samples.empty()) throw std::invalid_argument("empty sample list");
  if (model1.dim() != model2.dim()) {
    throw std::invalid_argument("model dimension mismatch");
  }
  std::vector<Vector> background;
  background.reserve(samples.size());
  for (const auto& s : samples) background.push_back(s.features);

  ValidationReport report;
  report.explanations.reserve(samples.size());
  std::size_t agree = 0;
  std::size_t consistent = 0;
  double stability = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& x = samples[i].features;
    const int p1 = predict(model1, x) >= 0.5 ? 1 : 0;
    const int p2 = predict(model2, x) >= 0.5 ? 1 : 0;
    ExplainConfig per_sample = cfg;
    per_sample.seed = derive_seed(cfg.seed, {kTagValidate, i});
    Explanation e1 = explain_with(model1, x, background, per_sample);
    Explanation e2 = explain_with(model2, x, background, per_sample);
    e1.sample_id = i;
    const bool same_top = top_feature(e1) == top_feature(e2);
    agree += p1 == p2;
    consistent += same_top;
    if (p1 != p2 || !same_top) report.flagged.push_back(i);
    stability += e1.stability;
    report.explanations.push_back(std::move(e1));
  }
  const double n = static_cast<double>(samples.size());
  report.agreement_rate = static_cast<double>(agree) / n;
  report.explanation_consistency = static_cast<double>(consistent) / n;
  report.mean_stability = stability / n;
  return report;
}

FeedbackUpdate local_correction(const ModelParams& model1,
                                std::span<const Sample> flagged,
                                std::span<const Sample> holdout,
                                const CorrectionConfig& cfg,
                                double explanation_stability) {
  FeedbackUpdate out;
  out.quality.explanation_stability = std::clamp(explanation_stability, 0.0, 1.0);
  if (flagged.empty()) {
    out.delta.assign(model1.dim() + 1, 0.0);
    return out;
  }
  TrainConfig train;
  train.lr = cfg.lr;
  train.epochs = cfg.steps;
  train.batch = cfg.batch;
  train.seed = cfg.seed;
  GradientUpdate update = train_local(model1, flagged, train);
  out.delta = std::move(update.grad);
  if (!holdout.empty()) {
    ModelParams corrected = model1;
    apply_delta(corrected, out.delta);
    out.quality.accuracy_gain =
        evaluate(corrected, holdout).accuracy - evaluate(model1, holdout).accuracy;
  }
  return out;
}

double sample_diversity(std::span<const std::size_t> sample_counts) {
  std::size_t total = 0;
  std::size_t nonzero = 0;
  for (std::size_t c : sample_counts) {
    total += c;
    nonzero += c > 0;
  }
  if (nonzero <= 1) return nonzero == 1 ? 1.0 : 0.0;
  double h = 0.0;
  for (std::size_t c : sample_counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return std::clamp(h / std::log(static_cast<double>(sample_counts.size())), 0.0, 1.0);
}

IntegrationWeights compute_weights(const FeedbackQuality& quality,
                                   const GlobalStats& global,
                                   const WeightConfig& cfg) {
  if (!(cfg.w_min > 0.0 && cfg.w_min < 0.5)) {
    throw std::invalid_argument("w_min must be in (0, 0.5)");
  }
  if (!(cfg.n_ref > 0.0)) throw std::invalid_argument("n_ref must be > 0");
  if (!(global.diversity >= 0.0 && global.diversity <= 1.0)) {
    throw std::invalid_argument("diversity must be in [0, 1]");
  }
  const double score_local = std::max(0.0, quality.accuracy_gain) *
                             std::clamp(quality.explanation_stability, 0.0, 1.0);
  const double score_global =
      global.diversity * std::log1p(static_cast<double>(global.total_samples)) /
      std::log1p(cfg.n_ref);
  IntegrationWeights w;
  const double total = score_local + score_global;
  w.w_local = total > 0.0
                  ? std::clamp(score_local / total, cfg.w_min, 1.0 - cfg.w_min)
                  : cfg.w_min;
  w.w_global = 1.0 - w.w_local;
  return w;
}

Vector integrate(const FeedbackUpdate& x, std::span<const double> y,
                 const IntegrationWeights& w) {
  if (x.delta.size() != y.size()) {
    throw std::invalid_argument("feedback/global dimension mismatch");
  }
  if (!(w.w_local >= 0.0 && w.w_local <= 1.0 && w.w_global >= 0.0 &&
        w.w_global <= 1.0) ||
      std::abs(w.w_local + w.w_global - 1.0) > 1e-12) {
    throw std::invalid_argument("integration weights must be a convex pair");
  }
  Vector out(y.size());
  kernels::lincomb(w.w_local, x.delta, w.w_global, y, out);
  return out;
}

}  // namespace fedledger
