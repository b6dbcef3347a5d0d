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

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "fedledger/model.h"
#include "fedledger/telemetry.h"
#include "test_util.h"

namespace fedledger {
namespace {

std::string dump(const FleetDataset& f) {
  std::ostringstream out;
  write_fleet_jsonl(f, out);
  return out.str();
}

double positive_share(const NodePartition& p) {
  double pos = 0;
  for (const auto& s : p.samples) pos += s.label;
  return pos / static_cast<double>(p.samples.size());
}

NodePartition partition_with_column(std::uint32_t id, const std::vector<double>& col) {
  NodePartition p;
  p.node_id = NodeId{id};
  for (double x : col) p.samples.push_back({{x, 1.0}, 0});
  return p;
}

TEST(GenerateFleet, SameSeedIsByteIdentical) {
  EXPECT_EQ(dump(generate_fleet(7, 1, 100, 4, 0.0)), dump(generate_fleet(7, 1, 100, 4, 0.0)));
}

TEST(GenerateFleet, DifferentSeedsDiffer) {
  EXPECT_NE(dump(generate_fleet(7, 2, 20, 4, 0.5)), dump(generate_fleet(8, 2, 20, 4, 0.5)));
}

TEST(GenerateFleet, FullHeterogeneitySkewsLabels) {
  const FleetDataset f = generate_fleet(7, 4, 50, 4, 1.0);
  double lo = 1.0, hi = 0.0;
  for (const auto& p : f.partitions) {
    lo = std::min(lo, positive_share(p));
    hi = std::max(hi, positive_share(p));
  }
  EXPECT_GT(hi - lo, 0.2);
}

TEST(GenerateFleet, ZeroSamplesRejected) {
  EXPECT_THROW(generate_fleet(7, 2, 0, 4, 0.0), std::invalid_argument);
  EXPECT_THROW(generate_fleet(7, 0, 10, 4, 0.0), std::invalid_argument);
  EXPECT_THROW(generate_fleet(7, 2, 10, 0, 0.0), std::invalid_argument);
  EXPECT_THROW(generate_fleet(7, 2, 10, 4, 1.5), std::invalid_argument);
}

TEST(GenerateFleet, ShapeInvariants) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const FleetDataset f = generate_fleet(seed, 5, 37, 6, 0.4);
    std::size_t total = 0;
    std::vector<std::uint32_t> ids;
    for (const auto& p : f.partitions) {
      ASSERT_FALSE(p.samples.empty());
      EXPECT_GE(p.sensitivity, 0.0);
      EXPECT_LE(p.sensitivity, 1.0);
      ids.push_back(p.node_id.value);
      for (const auto& s : p.samples) {
        ASSERT_EQ(s.features.size(), 6u);
        ASSERT_TRUE(s.label == 0 || s.label == 1);
      }
      total += p.samples.size();
    }
    EXPECT_EQ(total, 5u * 37u);
    std::sort(ids.begin(), ids.end());
    EXPECT_EQ(std::unique(ids.begin(), ids.end()), ids.end());
  }
}

TEST(GenerateFleet, LabelNoiseSetsTheAccuracyCeiling) {
  // The true hyperplane scores ~95% on fresh population draws.
  const FleetDataset f = generate_fleet(7, 2, 10, 8, 0.0);
  ModelParams truth{f.truth.weights, f.truth.bias, 0};
  const auto test = sample_population(f, 99, 20000);
  const double acc = evaluate(truth, test).accuracy;
  EXPECT_NEAR(acc, 0.95, 0.01);
}

TEST(Sensitivity, AllZeroFeaturesScoreZero) {
  const NodePartition zero = partition_with_column(0, {0, 0, 0});
  const NodePartition other = partition_with_column(1, {0, 1, 2});
  const std::vector<NodePartition> fleet = {zero, other};
  const auto scale = fleet_sensitivity_scale(fleet, 0);
  EXPECT_EQ(sensitivity_score(zero, scale), 0.0);
  // A fleet of one all-zero partition is degenerate and still scores 0.
  const std::vector<NodePartition> alone = {zero};
  EXPECT_EQ(sensitivity_score(zero, fleet_sensitivity_scale(alone, 0)), 0.0);
}

TEST(Sensitivity, MostVariantPartitionScoresOne) {
  const NodePartition a = partition_with_column(0, {0, 0, 0});
  const NodePartition b = partition_with_column(1, {0, 1, 2});
  const std::vector<NodePartition> fleet = {a, b};
  EXPECT_EQ(sensitivity_score(b, fleet_sensitivity_scale(fleet, 0)), 1.0);
}

TEST(Sensitivity, MidVarianceHandComputed) {
  // Variances (population): 0, 2/3, 1/6 -> (1/6 - 0) / (2/3 - 0) = 0.25.
  const NodePartition a = partition_with_column(0, {0, 0, 0});
  const NodePartition b = partition_with_column(1, {0, 1, 2});
  const NodePartition c = partition_with_column(2, {0, 0.5, 1});
  const std::vector<NodePartition> fleet = {a, b, c};
  EXPECT_NEAR(sensitivity_score(c, fleet_sensitivity_scale(fleet, 0)), 0.25, 1e-12);
}

TEST(Sensitivity, AlwaysInUnitIntervalProperty) {
  Rng rng = make_rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<NodePartition> fleet;
    const std::size_t n = 1 + rng() % 5;
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<double> col = testing::random_vector(rng, 1 + rng() % 6, 1e3 * (rng() % 3));
      fleet.push_back(partition_with_column(static_cast<std::uint32_t>(k), col));
    }
    const auto scale = fleet_sensitivity_scale(fleet, 0);
    for (const auto& p : fleet) {
      const double s = sensitivity_score(p, scale);
      ASSERT_GE(s, 0.0);
      ASSERT_LE(s, 1.0);
    }
    // Scoring a partition outside the fleet's range still clamps.
    const NodePartition wild = partition_with_column(99, {-1e6, 1e6});
    const double s = sensitivity_score(wild, scale);
    ASSERT_GE(s, 0.0);
    ASSERT_LE(s, 1.0);
  }
}

TEST(Sensitivity, MonotoneInColumnVariance) {
  const NodePartition lo = partition_with_column(0, {0, 0.1, 0.2});
  const NodePartition mid = partition_with_column(1, {0, 1, 2});
  const NodePartition hi = partition_with_column(2, {0, 5, 10});
  const std::vector<NodePartition> fleet = {lo, mid, hi};
  const auto scale = fleet_sensitivity_scale(fleet, 0);
  EXPECT_LT(sensitivity_score(lo, scale), sensitivity_score(mid, scale));
  EXPECT_LT(sensitivity_score(mid, scale), sensitivity_score(hi, scale));
}

TEST(SplitPartition, DeterministicAndComplete) {
  const FleetDataset f = generate_fleet(3, 1, 100, 4, 0.0);
  const auto a = split_partition(f.partitions[0], 0.3, 11);
  const auto b = split_partition(f.partitions[0], 0.3, 11);
  EXPECT_EQ(a.holdout.size(), 30u);
  EXPECT_EQ(a.train.size(), 70u);
  ASSERT_EQ(a.train.size(), b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    EXPECT_EQ(a.train[i].features, b.train[i].features);
  }
}

TEST(SplitPartition, TinyPartitionsKeepBothSidesNonEmpty) {
  const NodePartition p = partition_with_column(0, {1, 2});
  const auto s = split_partition(p, 0.01, 1);
  EXPECT_EQ(s.train.size(), 1u);
  EXPECT_EQ(s.holdout.size(), 1u);
  EXPECT_THROW(split_partition(p, 0.0, 1), std::invalid_argument);
}

TEST(FleetJsonl, RoundTrip) {
  const FleetDataset f = generate_fleet(9, 3, 12, 5, 0.7);
  std::istringstream in(dump(f));
  const FleetDataset back = read_fleet_jsonl(in, f.sensitive_feature);
  ASSERT_EQ(back.partitions.size(), f.partitions.size());
  EXPECT_EQ(dump(back), dump(f));
  for (std::size_t k = 0; k < f.partitions.size(); ++k) {
    EXPECT_DOUBLE_EQ(back.partitions[k].sensitivity, f.partitions[k].sensitivity);
  }
}

}  // namespace
}  // namespace fedledger
