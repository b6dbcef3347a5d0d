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

#ifndef FEDLEDGER_TELEMETRY_H_
#define FEDLEDGER_TELEMETRY_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "fedledger/common.h"

namespace fedledger {

struct Sample {
  Vector features;
  int label = 0;  // 0 or 1
};

struct NodePartition {
  NodeId node_id;
  std::vector<Sample> samples;
  double sensitivity = 0.0;  // in [0, 1]
};

// Ground-truth separating hyperplane; clean label = [w.x + b > 0].
struct Hyperplane {
  Vector weights;
  double bias = 0.0;
};

struct FleetSpec {
  std::uint64_t seed = 0;
  std::size_t n_nodes = 1;
  std::size_t samples_per_node = 1;
  std::size_t feature_dim = 1;
  double heterogeneity = 0.0;  // 0: IID, 1: strong label skew + feature shift
  double label_noise = 0.05;
  std::size_t sensitive_feature = 0;  // the location-like column
};

struct FleetDataset {
  std::vector<NodePartition> partitions;
  std::size_t feature_dim = 0;
  std::size_t sensitive_feature = 0;
  double label_noise = 0.0;
  Hyperplane truth;
};

// Deterministic synthetic fleet. Each node's positive-label share is drawn
// from a symmetric Beta (two-class Dirichlet) whose concentration shrinks as
// heterogeneity grows; features are N(shift_k, I) with a per-node shift and a
// per-node spread on the location column, both scaled by heterogeneity.
// Throws std::invalid_argument on zero counts or out-of-range knobs.
FleetDataset generate_fleet(const FleetSpec& spec);
FleetDataset generate_fleet(std::uint64_t seed, std::size_t n_nodes,
                            std::size_t samples_per_node,
                            std::size_t feature_dim, double heterogeneity);

// Fresh draws from the unshifted, unskewed population (same hyperplane and
// label noise). Used as the global held-out evaluation set.
std::vector<Sample> sample_population(const FleetDataset& fleet,
                                      std::uint64_t seed, std::size_t n);

// Min-max bounds of the location-column variance across a fleet.
struct SensitivityScale {
  std::size_t column = 0;
  double min_variance = 0.0;
  double max_variance = 0.0;
};

double column_variance(std::span<const Sample> samples, std::size_t column);
SensitivityScale fleet_sensitivity_scale(
    std::span<const NodePartition> partitions, std::size_t column);

// (var - min) / (max - min) clamped to [0, 1]. A degenerate scale
// (max == min) maps any positive variance at or above max to 1 and
// everything else to 0.
double sensitivity_score(const NodePartition& partition,
                         const SensitivityScale& scale);

struct LocalSplit {
  std::vector<Sample> train;
  std::vector<Sample> holdout;
};

// Deterministic shuffle then split; both sides non-empty when the partition
// has at least two samples.
LocalSplit split_partition(const NodePartition& partition,
                           double holdout_fraction, std::uint64_t seed);

// JSON lines, one {"node_id", "features", "label"} object per sample.
void write_fleet_jsonl(const FleetDataset& fleet, std::ostream& out);
// Rebuilds partitions (grouped by node_id, ascending) and recomputes
// sensitivities. The ground-truth hyperplane is not part of the dump.
FleetDataset read_fleet_jsonl(std::istream& in, std::size_t sensitive_feature);

}  // namespace fedledger

#endif  // FEDLEDGER_TELEMETRY_H_
