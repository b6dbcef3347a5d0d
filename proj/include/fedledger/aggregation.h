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

#ifndef FEDLEDGER_AGGREGATION_H_
#define FEDLEDGER_AGGREGATION_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedledger/common.h"
#include "fedledger/masking.h"
#include "fedledger/model.h"
#include "fedledger/privacy.h"

namespace fedledger {

// Raised when a round cannot produce a global model (all updates dropped,
// participant set mismatch). The orchestrator keeps the previous model.
class RoundAbort : public Error {
 public:
  using Error::Error;
};

// M_C: the new global model and the delta that produced it from the base.
struct GlobalUpdate {
  ModelParams params;
  Vector delta;  // flattened params - base, bias last
  std::vector<NodeId> contributing_nodes;
  std::size_t total_samples = 0;
  std::uint64_t round = 0;
  double epsilon_global = kInfinity;
};

struct DroppedUpdate {
  NodeId node;
  std::string reason;
};

struct PreprocessResult {
  std::vector<MaskedUpdate> kept;  // ascending node id
  std::vector<DroppedUpdate> dropped;
};

// Drops payloads with non-finite entries or the wrong length (expected
// dim + 1 entries including bias). Throws RoundAbort when nothing survives.
PreprocessResult preprocess_updates(std::vector<MaskedUpdate> admitted,
                                    std::size_t payload_len);

// Coordinate-wise sum of masked payloads. Masks only cancel over the full
// participant set, so the node ids must match `participants` exactly;
// otherwise throws RoundAbort. Only masked payloads are accepted.
Vector smpc_sum(std::span<const MaskedUpdate> masked,
                std::span<const NodeId> participants);

struct WeightedDelta {
  Vector delta;
  std::size_t n_samples = 0;
};

// base + sum_k (n_k / N) delta_k; version = base.version + 1. Throws
// std::invalid_argument on an empty list, zero total, or length mismatch.
GlobalUpdate fedavg(std::span<const WeightedDelta> updates,
                    const ModelParams& base);

// FedAvg from a secure sum of sample-weighted deltas (each node contributes
// n_k * delta_k): base + weighted_sum / total_samples.
GlobalUpdate fedavg_from_sum(std::span<const double> weighted_sum,
                             std::size_t total_samples, const ModelParams& base);

// Clips the aggregate delta to clip_global, then applies the Gaussian
// mechanism and rebuilds params from base. epsilon_global = +inf is the
// identity.
GlobalUpdate privacy_adjust_global(const GlobalUpdate& g, const ModelParams& base,
                                   double epsilon_global, double delta,
                                   double clip_global, std::uint64_t rng_seed);

}  // namespace fedledger

#endif  // FEDLEDGER_AGGREGATION_H_
