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

#include "fedledger/aggregation.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fedledger/kernels.h"
#include "fedledger/privacy.h"

namespace fedledger {

PreprocessResult preprocess_updates(std::vector<MaskedUpdate> admitted,
                                    std::size_t payload_len) {
  std::stable_sort(admitted.begin(), admitted.end(),
                   [](const MaskedUpdate& a, const MaskedUpdate& b) {
                     return a.node_id < b.node_id;
                   });
  PreprocessResult out;
  for (auto& u : admitted) {
    if (u.payload.size() != payload_len) {
      out.dropped.push_back({u.node_id, "dimension " + std::to_string(u.payload.size()) +
                                            " != " + std::to_string(payload_len)});
      continue;
    }
    if (!std::all_of(u.payload.begin(), u.payload.end(),
                     [](double x) { return std::isfinite(x); })) {
      out.dropped.push_back({u.node_id, "non-finite payload"});
      continue;
    }
    out.kept.push_back(std::move(u));
  }
  if (out.kept.empty()) throw RoundAbort("every update was dropped in preprocessing");
  return out;
}

Vector smpc_sum(std::span<const MaskedUpdate> masked,
                std::span<const NodeId> participants) {
  std::vector<NodeId> got;
  got.reserve(masked.size());
  for (const auto& m : masked) got.push_back(m.node_id);
  std::vector<NodeId> want(participants.begin(), participants.end());
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  if (got != want || masked.empty()) {
    throw RoundAbort("masked update set does not match the round's participants");
  }
  Vector sum(masked.front().payload.size(), 0.0);
  for (const auto& m : masked) {
    if (m.payload.size() != sum.size()) throw RoundAbort("payload length mismatch");
    kernels::add(m.payload, sum);
  }
  return sum;
}

GlobalUpdate fedavg(std::span<const WeightedDelta> updates,
                    const ModelParams& base) {
  if (updates.empty()) throw std::invalid_argument("fedavg of no updates");
  std::size_t total = 0;
  for (const auto& u : updates) {
    if (u.delta.size() != base.dim() + 1) {
      throw std::invalid_argument("delta length must be dim + 1");
    }
    total += u.n_samples;
  }
  if (total == 0) throw std::invalid_argument("total sample count is zero");
  Vector weighted(base.dim() + 1, 0.0);
  for (const auto& u : updates) {
    kernels::axpy(static_cast<double>(u.n_samples), u.delta, weighted);
  }
  return fedavg_from_sum(weighted, total, base);
}

GlobalUpdate fedavg_from_sum(std::span<const double> weighted_sum,
                             std::size_t total_samples, const ModelParams& base) {
  if (total_samples == 0) throw std::invalid_argument("total sample count is zero");
  if (weighted_sum.size() != base.dim() + 1) {
    throw std::invalid_argument("sum length must be dim + 1");
  }
  GlobalUpdate g;
  g.delta.assign(weighted_sum.begin(), weighted_sum.end());
  kernels::scale(1.0 / static_cast<double>(total_samples), g.delta);
  g.params = base;
  apply_delta(g.params, g.delta);
  g.params.version = base.version + 1;
  g.total_samples = total_samples;
  return g;
}

GlobalUpdate privacy_adjust_global(const GlobalUpdate& g, const ModelParams& base,
                                   double epsilon_global, double delta,
                                   double clip_global, std::uint64_t rng_seed) {
  const double sigma = gaussian_sigma(clip_global, delta, epsilon_global);
  GlobalUpdate out = g;
  out.epsilon_global = epsilon_global;
  if (std::isinf(epsilon_global)) return out;
  for (double x : out.params.weights) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite global params");
  }
  clip_to_norm(out.delta, clip_global);
  add_gaussian_noise(out.delta, sigma, rng_seed);
  out.params = base;
  apply_delta(out.params, out.delta);
  out.params.version = g.params.version;
  return out;
}

}  // namespace fedledger
