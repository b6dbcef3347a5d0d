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

#ifndef FEDLEDGER_MODEL_H_
#define FEDLEDGER_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fedledger/common.h"
#include "fedledger/telemetry.h"

namespace fedledger {

// Logistic classifier. Also the global model M_C when it carries a version.
struct ModelParams {
  Vector weights;
  double bias = 0.0;
  std::uint64_t version = 0;

  std::size_t dim() const { return weights.size(); }
  static ModelParams zeros(std::size_t dim) { return {Vector(dim, 0.0), 0.0, 0}; }
};

// Flattened parameters: weights followed by bias.
Vector flatten(const ModelParams& params);
// Adds a flattened delta (dim + 1 entries) to params in place.
void apply_delta(ModelParams& params, std::span<const double> delta);

// Pre-masking update: the parameter change produced by local training,
// laid out like flatten() (bias last).
struct GradientUpdate {
  Vector grad;
  std::size_t n_samples = 0;
  std::vector<double> loss_trace;  // mean loss after each epoch
};

// Canonical bytes of a model (version, weights, bias) for hashing and
// transport.
Bytes encode_model(const ModelParams& params);
ModelParams decode_model(std::span<const std::uint8_t> bytes);

double sigmoid(double z);
// log(1 + exp(z)) without overflow.
double softplus(double z);

// sigmoid(w.x + b). Throws std::invalid_argument on dimension mismatch.
double predict(const ModelParams& params, std::span<const double> features);

// Binary cross-entropy of one sample, computed from the logit.
double log_loss(const ModelParams& params, const Sample& sample);
double mean_log_loss(const ModelParams& params, std::span<const Sample> samples);

// Gradient of the mean log-loss over `samples`, flattened (bias last).
Vector log_loss_gradient(const ModelParams& params,
                         std::span<const Sample> samples);

struct TrainConfig {
  double lr = 0.1;
  std::size_t epochs = 1;
  std::size_t batch = 32;
  std::uint64_t seed = 0;
};

// Minibatch SGD over a shuffled copy of `samples`, reshuffled every epoch.
// Returns the cumulative parameter delta (trained minus initial). Throws
// std::invalid_argument on bad config or empty data, Error on a non-finite
// loss.
GradientUpdate train_local(const ModelParams& params,
                           std::span<const Sample> samples,
                           const TrainConfig& cfg);
GradientUpdate train_local(const ModelParams& params,
                           const NodePartition& partition,
                           const TrainConfig& cfg);

struct Evaluation {
  double accuracy = 0.0;
  double mean_loss = 0.0;
  // Fraction of label-0 samples predicted 1; 0 when there are none.
  double false_positive_rate = 0.0;
};

// Threshold 0.5. Throws std::invalid_argument on an empty sample list.
Evaluation evaluate(const ModelParams& params, std::span<const Sample> samples);

}  // namespace fedledger

#endif  // FEDLEDGER_MODEL_H_
