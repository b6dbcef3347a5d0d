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

#ifndef FEDLEDGER_XAI_H_
#define FEDLEDGER_XAI_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fedledger/common.h"
#include "fedledger/model.h"
#include "fedledger/telemetry.h"

namespace fedledger {

enum class ExplainMethod { kPermutation, kLocalSurrogate };

std::string_view to_string(ExplainMethod m);

struct Explanation {
  std::size_t sample_id = 0;
  Vector attributions;  // per-feature importance, >= 0
  ExplainMethod method = ExplainMethod::kPermutation;
  double stability = 1.0;  // 1 - normalized spread across repeats
};

struct ExplainConfig {
  ExplainMethod method = ExplainMethod::kPermutation;
  std::size_t n_repeats = 8;
  std::uint64_t seed = 0;
};

// Permutation importance: attribution_j is the mean over repeats of
// |predict(x) - predict(x with feature j taken from a random background
// row)|. Stability is 1 - sum_j std_j / (sum_j mean_j + sum_j std_j), which
// is 1 when every repeat agrees and stays in [0, 1].
// Throws std::invalid_argument on an empty background, zero repeats or a
// dimension mismatch.
Explanation explain(const ModelParams& params, std::span<const double> sample,
                    std::span<const Vector> background, std::size_t n_repeats,
                    std::uint64_t seed);

// Local linear surrogate: per repeat, fits a ridge regression of the model's
// predictions on which features were kept versus replaced from background
// rows; attributions are the absolute coefficients. Same stability measure.
Explanation explain_surrogate(const ModelParams& params,
                              std::span<const double> sample,
                              std::span<const Vector> background,
                              std::size_t n_repeats, std::uint64_t seed);

Explanation explain_with(const ModelParams& params, std::span<const double> sample,
                         std::span<const Vector> background,
                         const ExplainConfig& cfg);

// argmax |attribution|, ties to the lowest index.
std::size_t top_feature(const Explanation& e);

struct ValidationReport {
  double agreement_rate = 1.0;
  std::vector<std::size_t> flagged;  // indices into the evaluated samples
  double explanation_consistency = 1.0;
  double mean_stability = 1.0;  // of model 1's explanations
  std::vector<Explanation> explanations;  // model 1, one per sample
};

// A sample is flagged when the thresholded predictions of the two models
// differ or their top-attributed features differ. Both models explain each
// sample with the same random stream, and the evaluated samples themselves
// serve as background. Throws std::invalid_argument on empty samples or a
// dimension mismatch between the models.
ValidationReport validate_predictions(const ModelParams& model1,
                                      const ModelParams& model2,
                                      std::span<const Sample> samples,
                                      const ExplainConfig& cfg);

struct FeedbackQuality {
  double accuracy_gain = 0.0;
  double explanation_stability = 0.0;
};

// x: the local feedback update.
struct FeedbackUpdate {
  Vector delta;
  FeedbackQuality quality;
};

struct CorrectionConfig {
  double lr = 0.1;
  std::size_t steps = 10;  // epochs over the flagged subset
  std::size_t batch = 32;
  std::uint64_t seed = 0;
};

// SGD on the flagged samples only, starting from model1. accuracy_gain is
// post- minus pre-correction accuracy on `holdout`. An empty flagged set
// yields a zero delta and zero gain.
FeedbackUpdate local_correction(const ModelParams& model1,
                                std::span<const Sample> flagged,
                                std::span<const Sample> holdout,
                                const CorrectionConfig& cfg,
                                double explanation_stability);

struct IntegrationWeights {
  double w_local = 0.5;
  double w_global = 0.5;
};

struct GlobalStats {
  std::size_t total_samples = 0;
  double diversity = 0.0;  // in [0, 1]
};

struct WeightConfig {
  double w_min = 0.05;       // in (0, 0.5)
  double n_ref = 10000.0;    // sample count at which size saturates
};

// Normalized Shannon entropy of per-node sample shares; 1 for one node.
double sample_diversity(std::span<const std::size_t> sample_counts);

// score_L = max(0, accuracy_gain) * explanation_stability
// score_G = diversity * log(1 + total) / log(1 + n_ref)
// w_local = clamp(score_L / (score_L + score_G), w_min, 1 - w_min), or w_min
// when both scores are zero; w_global = 1 - w_local.
IntegrationWeights compute_weights(const FeedbackQuality& quality,
                                   const GlobalStats& global,
                                   const WeightConfig& cfg);

// w_local * x.delta + w_global * y. Throws std::invalid_argument on a
// dimension mismatch or weights that are not a convex pair.
Vector integrate(const FeedbackUpdate& x, std::span<const double> y,
                 const IntegrationWeights& w);

}  // namespace fedledger

#endif  // FEDLEDGER_XAI_H_
