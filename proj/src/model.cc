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

#include "fedledger/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fedledger/encoding.h"
#include "fedledger/kernels.h"
#include "fedledger/rng.h"

namespace fedledger {
namespace {

void check_dim(const ModelParams& params, std::size_t n) {
  if (params.dim() != n) {
    throw std::invalid_argument("dimension mismatch: model " +
                                std::to_string(params.dim()) + " vs input " +
                                std::to_string(n));
  }
}

double logit(const ModelParams& params, std::span<const double> x) {
  return kernels::dot(params.weights, x) + params.bias;
}

}  // namespace

Vector flatten(const ModelParams& params) {
  Vector out(params.weights);
  out.push_back(params.bias);
  return out;
}

void apply_delta(ModelParams& params, std::span<const double> delta) {
  if (delta.size() != params.dim() + 1) {
    throw std::invalid_argument("delta length must be dim + 1");
  }
  kernels::add(delta.first(params.dim()), params.weights);
  params.bias += delta.back();
}

Bytes encode_model(const ModelParams& params) {
  ByteWriter w;
  w.u64(params.version).u32(static_cast<std::uint32_t>(params.dim()));
  for (double x : params.weights) w.f64(x);
  w.f64(params.bias);
  return std::move(w).take();
}

ModelParams decode_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  ModelParams p;
  p.version = r.u64();
  p.weights.resize(r.u32());
  for (double& x : p.weights) x = r.f64();
  p.bias = r.f64();
  if (!r.done()) throw Error("trailing bytes after model");
  return p;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double predict(const ModelParams& params, std::span<const double> features) {
  check_dim(params, features.size());
  return sigmoid(logit(params, features));
}

// -[y log s(z) + (1-y) log(1 - s(z))] = softplus(z) - y z
double log_loss(const ModelParams& params, const Sample& sample) {
  check_dim(params, sample.features.size());
  const double z = logit(params, sample.features);
  return softplus(z) - static_cast<double>(sample.label) * z;
}

double mean_log_loss(const ModelParams& params, std::span<const Sample> samples) {
  if (samples.empty()) throw std::invalid_argument("empty sample list");
  double total = 0.0;
  for (const auto& s : samples) total += log_loss(params, s);
  return total / static_cast<double>(samples.size());
}

Vector log_loss_gradient(const ModelParams& params,
                         std::span<const Sample> samples) {
  if (samples.empty()) throw std::invalid_argument("empty sample list");
  const std::size_t d = params.dim();
  Vector g(d + 1, 0.0);
  std::span<double> gw(g.data(), d);
  for (const auto& s : samples) {
    check_dim(params, s.features.size());
    const double r = sigmoid(logit(params, s.features)) - s.label;
    kernels::axpy(r, s.features, gw);
    g[d] += r;
  }
  kernels::scale(1.0 / static_cast<double>(samples.size()), g);
  return g;
}

GradientUpdate train_local(const ModelParams& params,
                           std::span<const Sample> samples,
                           const TrainConfig& cfg) {
  if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr)) {
    throw std::invalid_argument("lr must be positive and finite");
  }
  if (cfg.epochs == 0) throw std::invalid_argument("epochs must be >= 1");
  if (cfg.batch == 0) throw std::invalid_argument("batch must be >= 1");
  if (samples.empty()) throw std::invalid_argument("empty partition");
  for (const auto& s : samples) check_dim(params, s.features.size());

  ModelParams current = params;
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(cfg.seed);
  const std::size_t d = params.dim();
  Vector g(d + 1);
  std::span<double> gw(g.data(), d);

  GradientUpdate out;
  out.loss_trace.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t end = std::min(order.size(), start + cfg.batch);
      std::fill(g.begin(), g.end(), 0.0);
      for (std::size_t i = start; i < end; ++i) {
        const Sample& s = samples[order[i]];
        const double r = sigmoid(logit(current, s.features)) - s.label;
        kernels::axpy(r, s.features, gw);
        g[d] += r;
      }
      const double step = -cfg.lr / static_cast<double>(end - start);
      kernels::axpy(step, gw, current.weights);
      current.bias += step * g[d];
    }
    const double loss = mean_log_loss(current, samples);
    if (!std::isfinite(loss)) {
      throw Error("non-finite loss at epoch " + std::to_string(epoch) +
                  " (lr=" + std::to_string(cfg.lr) + ")");
    }
    out.loss_trace.push_back(loss);
  }

  out.grad = flatten(current);
  kernels::sub(flatten(params), out.grad);
  out.n_samples = samples.size();
  return out;
}

GradientUpdate train_local(const ModelParams& params,
                           const NodePartition& partition,
                           const TrainConfig& cfg) {
  return train_local(params, partition.samples, cfg);
}

Evaluation evaluate(const ModelParams& params, std::span<const Sample> samples) {
  if (samples.empty()) throw std::invalid_argument("empty sample list");
  std::size_t correct = 0;
  std::size_t negatives = 0;
  std::size_t false_positives = 0;
  double loss = 0.0;
  for (const auto& s : samples) {
    check_dim(params, s.features.size());
    const double z = logit(params, s.features);
    const int predicted = sigmoid(z) >= 0.5 ? 1 : 0;
    correct += predicted == s.label;
    if (s.label == 0) {
      ++negatives;
      false_positives += predicted == 1;
    }
    loss += softplus(z) - static_cast<double>(s.label) * z;
  }
  const double n = static_cast<double>(samples.size());
  Evaluation e;
  e.accuracy = static_cast<double>(correct) / n;
  e.mean_loss = loss / n;
  e.false_positive_rate =
      negatives == 0 ? 0.0
                     : static_cast<double>(false_positives) /
                           static_cast<double>(negatives);
  return e;
}

}  // namespace fedledger
