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

#ifndef FEDLEDGER_CONFIG_H_
#define FEDLEDGER_CONFIG_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fedledger/ledger.h"
#include "fedledger/model.h"
#include "fedledger/privacy.h"
#include "fedledger/telemetry.h"
#include "fedledger/xai.h"

namespace fedledger {

enum class IntegrationSite { kNode, kCloud };

std::string_view to_string(IntegrationSite s);

struct AttackSettings {
  bool enabled = false;           // in-run replay probes reported per round
  std::size_t injections = 100;   // per attack kind in the suite
  double poison_factor = 100.0;
  double poison_boundary_factor = 1.01;
  std::size_t baseline_rounds = 6;  // 1 + 6 * 9 = 55 blocks at 4 nodes
  std::vector<std::uint64_t> seeds = {7};
};

// Everything a run depends on. Loaded from JSON; see configs/default.json
// for the schema with defaults.
struct RunConfig {
  std::uint64_t seed = 7;
  std::size_t rounds = 10;

  FleetSpec fleet{.seed = 7, .n_nodes = 4, .samples_per_node = 200,
                  .feature_dim = 8, .heterogeneity = 0.3};
  double holdout_fraction = 0.3;
  std::size_t test_samples = 2000;

  double lr = 0.5;
  std::size_t epochs = 5;
  std::size_t batch = 16;

  PrivacyBounds privacy;
  double budget_cap = 20.0;
  double epsilon_global = kInfinity;
  double clip_global = 1.0;

  ValidatorSet validators{{{"v0", 1.0}, {"v1", 1.0}, {"v2", 1.0}, {"v3", 1.0},
                           {"v4", 1.0}},
                          2.0 / 3.0};
  std::map<std::string, ValidatorBehavior> byzantine;
  std::size_t committee_size = 5;
  ContractRules rules;

  std::uint64_t ticks_per_round = 10;

  IntegrationSite integration_site = IntegrationSite::kNode;
  WeightConfig weights;
  CorrectionConfig correction{.lr = 0.1, .steps = 10, .batch = 16, .seed = 0};
  ExplainConfig explain{.method = ExplainMethod::kPermutation, .n_repeats = 8,
                        .seed = 0};
  std::size_t validator_epochs = 50;
  std::size_t explanations_per_node = 3;

  std::vector<double> threat_schedule = {0.1};
  std::string output_dir = "fedledger-out";
  AttackSettings attacks;

  // Threat for a 1-based round; a single-entry schedule applies to every
  // round.
  double threat_at(std::uint64_t round) const;

  // Throws std::invalid_argument describing the first invalid field.
  void validate() const;
};

// Unknown keys anywhere in the document are rejected. Numbers that may be
// infinite accept the string "inf". Throws std::invalid_argument.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json config_to_json(const RunConfig& cfg);

}  // namespace fedledger

#endif  // FEDLEDGER_CONFIG_H_
