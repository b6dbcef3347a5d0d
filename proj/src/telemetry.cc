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

#include "fedledger/telemetry.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "fedledger/kernels.h"
#include "fedledger/rng.h"

namespace fedledger {
namespace {

constexpr std::uint64_t kTagTruth = 0x7472757468;
constexpr std::uint64_t kTagNode = 0x6e6f6465;
constexpr std::uint64_t kTagPopulation = 0x706f70;

// Beta concentration at heterogeneity 1 and just above 0.
constexpr double kSkewConcentration = 0.3;
constexpr double kIidConcentration = 100.0;
constexpr double kMaxShift = 0.5;
constexpr double kMaxLocationSpread = 0.75;

int clean_label(const Hyperplane& h, std::span<const double> x) {
  return kernels::dot(h.weights, x) + h.bias > 0.0 ? 1 : 0;
}

// Mirror x across the hyperplane (unit normal, zero bias): flips the clean
// label and preserves any distribution symmetric about the hyperplane.
void reflect(const Hyperplane& h, std::span<double> x) {
  kernels::axpy(-2.0 * kernels::dot(h.weights, x), h.weights, x);
}

double beta_symmetric(Rng& rng, double concentration) {
  std::gamma_distribution<double> gamma(concentration, 1.0);
  double a = gamma(rng);
  double b = gamma(rng);
  return a + b > 0.0 ? a / (a + b) : 0.5;
}

}  // namespace

FleetDataset generate_fleet(const FleetSpec& spec) {
  if (spec.n_nodes == 0) throw std::invalid_argument("n_nodes must be >= 1");
  if (spec.samples_per_node == 0) {
    throw std::invalid_argument("samples_per_node must be >= 1");
  }
  if (spec.feature_dim == 0) {
    throw std::invalid_argument("feature_dim must be >= 1");
  }
  if (!(spec.heterogeneity >= 0.0 && spec.heterogeneity <= 1.0)) {
    throw std::invalid_argument("heterogeneity must be in [0, 1]");
  }
  if (!(spec.label_noise >= 0.0 && spec.label_noise < 0.5)) {
    throw std::invalid_argument("label_noise must be in [0, 0.5)");
  }
  if (spec.sensitive_feature >= spec.feature_dim) {
    throw std::invalid_argument("sensitive_feature out of range");
  }

  FleetDataset fleet;
  fleet.feature_dim = spec.feature_dim;
  fleet.sensitive_feature = spec.sensitive_feature;
  fleet.label_noise = spec.label_noise;

  {
    Rng rng = make_rng(derive_seed(spec.seed, {kTagTruth}));
    std::normal_distribution<double> normal;
    Vector w(spec.feature_dim);
    for (double& v : w) v = normal(rng);
    double n = kernels::norm2(w);
    if (n == 0.0) {
      w[0] = 1.0;
      n = 1.0;
    }
    kernels::scale(1.0 / n, w);
    fleet.truth = {std::move(w), 0.0};
  }

  const double h = spec.heterogeneity;
  // Log-linear interpolation of the Beta concentration.
  const double concentration =
      std::exp((1.0 - h) * std::log(kIidConcentration) +
               h * std::log(kSkewConcentration));

  fleet.partitions.reserve(spec.n_nodes);
  for (std::size_t k = 0; k < spec.n_nodes; ++k) {
    Rng rng = make_rng(derive_seed(spec.seed, {kTagNode, k}));
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit;

    const double positive_share = h == 0.0 ? 0.5 : beta_symmetric(rng, concentration);
    Vector shift(spec.feature_dim, 0.0);
    double location_spread = 1.0;
    if (h > 0.0) {
      for (double& s : shift) s = h * kMaxShift * normal(rng);
      location_spread = 1.0 + h * kMaxLocationSpread * (2.0 * unit(rng) - 1.0);
    }

    NodePartition part;
    part.node_id = NodeId{static_cast<std::uint32_t>(k)};
    part.samples.reserve(spec.samples_per_node);
    for (std::size_t i = 0; i < spec.samples_per_node; ++i) {
      Sample s;
      s.features.resize(spec.feature_dim);
      for (std::size_t j = 0; j < spec.feature_dim; ++j) {
        s.features[j] = shift[j] + normal(rng);
      }
      s.features[spec.sensitive_feature] *= location_spread;
      const int want = unit(rng) < positive_share ? 1 : 0;
      if (clean_label(fleet.truth, s.features) != want) {
        reflect(fleet.truth, s.features);
      }
      s.label = clean_label(fleet.truth, s.features);
      if (unit(rng) < spec.label_noise) s.label = 1 - s.label;
      part.samples.push_back(std::move(s));
    }
    fleet.partitions.push_back(std::move(part));
  }

  const SensitivityScale scale =
      fleet_sensitivity_scale(fleet.partitions, spec.sensitive_feature);
  for (auto& p : fleet.partitions) p.sensitivity = sensitivity_score(p, scale);
  return fleet;
}

FleetDataset generate_fleet(std::uint64_t seed, std::size_t n_nodes,
                            std::size_t samples_per_node,
                            std::size_t feature_dim, double heterogeneity) {
  FleetSpec spec;
  spec.seed = seed;
  spec.n_nodes = n_nodes;
  spec.samples_per_node = samples_per_node;
  spec.feature_dim = feature_dim;
  spec.heterogeneity = heterogeneity;
  return generate_fleet(spec);
}

std::vector<Sample> sample_population(const FleetDataset& fleet,
                                      std::uint64_t seed, std::size_t n) {
  Rng rng = make_rng(derive_seed(seed, {kTagPopulation}));
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  std::vector<Sample> out(n);
  for (auto& s : out) {
    s.features.resize(fleet.feature_dim);
    for (double& v : s.features) v = normal(rng);
    s.label = clean_label(fleet.truth, s.features);
    if (unit(rng) < fleet.label_noise) s.label = 1 - s.label;
  }
  return out;
}

double column_variance(std::span<const Sample> samples, std::size_t column) {
  if (samples.empty()) return 0.0;
  // Welford.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (const auto& s : samples) {
    const double x = s.features.at(column);
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  return m2 / static_cast<double>(n);
}

SensitivityScale fleet_sensitivity_scale(
    std::span<const NodePartition> partitions, std::size_t column) {
  SensitivityScale scale;
  scale.column = column;
  bool first = true;
  for (const auto& p : partitions) {
    const double v = column_variance(p.samples, column);
    if (first) {
      scale.min_variance = scale.max_variance = v;
      first = false;
    } else {
      scale.min_variance = std::min(scale.min_variance, v);
      scale.max_variance = std::max(scale.max_variance, v);
    }
  }
  return scale;
}

double sensitivity_score(const NodePartition& partition,
                         const SensitivityScale& scale) {
  const double v = column_variance(partition.samples, scale.column);
  const double range = scale.max_variance - scale.min_variance;
  if (!(range > 0.0) || !std::isfinite(range)) {
    return (v > 0.0 && v >= scale.max_variance) ? 1.0 : 0.0;
  }
  const double score = (v - scale.min_variance) / range;
  if (std::isnan(score)) return 1.0;
  return std::clamp(score, 0.0, 1.0);
}

LocalSplit split_partition(const NodePartition& partition,
                           double holdout_fraction, std::uint64_t seed) {
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    throw std::invalid_argument("holdout_fraction must be in (0, 1)");
  }
  const std::size_t n = partition.samples.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::size_t n_holdout = static_cast<std::size_t>(
      std::llround(holdout_fraction * static_cast<double>(n)));
  if (n >= 2) n_holdout = std::clamp<std::size_t>(n_holdout, 1, n - 1);

  LocalSplit split;
  for (std::size_t i = 0; i < n; ++i) {
    const Sample& s = partition.samples[order[i]];
    (i < n_holdout ? split.holdout : split.train).push_back(s);
  }
  return split;
}

void write_fleet_jsonl(const FleetDataset& fleet, std::ostream& out) {
  for (const auto& p : fleet.partitions) {
    for (const auto& s : p.samples) {
      nlohmann::json j = {{"node_id", p.node_id.value},
                          {"features", s.features},
                          {"label", s.label}};
      out << j.dump() << '\n';
    }
  }
}

FleetDataset read_fleet_jsonl(std::istream& in, std::size_t sensitive_feature) {
  std::map<std::uint32_t, NodePartition> by_node;
  FleetDataset fleet;
  fleet.sensitive_feature = sensitive_feature;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error("line " + std::to_string(line_no) + ": " + e.what());
    }
    Sample s;
    s.features = j.at("features").get<Vector>();
    s.label = j.at("label").get<int>();
    if (s.label != 0 && s.label != 1) {
      throw Error("line " + std::to_string(line_no) + ": label must be 0 or 1");
    }
    if (fleet.feature_dim == 0) fleet.feature_dim = s.features.size();
    if (s.features.empty() || s.features.size() != fleet.feature_dim) {
      throw Error("line " + std::to_string(line_no) + ": feature length mismatch");
    }
    const auto id = j.at("node_id").get<std::uint32_t>();
    auto& part = by_node[id];
    part.node_id = NodeId{id};
    part.samples.push_back(std::move(s));
  }
  if (by_node.empty()) throw Error("empty fleet dump");
  if (sensitive_feature >= fleet.feature_dim) {
    throw Error("sensitive_feature out of range");
  }
  for (auto& [id, part] : by_node) fleet.partitions.push_back(std::move(part));
  const SensitivityScale scale =
      fleet_sensitivity_scale(fleet.partitions, sensitive_feature);
  for (auto& p : fleet.partitions) p.sensitivity = sensitivity_score(p, scale);
  return fleet;
}

}  // namespace fedledger
