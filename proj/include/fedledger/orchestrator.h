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

#ifndef FEDLEDGER_ORCHESTRATOR_H_
#define FEDLEDGER_ORCHESTRATOR_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedledger/aggregation.h"
#include "fedledger/channel.h"
#include "fedledger/config.h"
#include "fedledger/ledger.h"
#include "fedledger/masking.h"
#include "fedledger/model.h"
#include "fedledger/privacy.h"
#include "fedledger/telemetry.h"
#include "fedledger/xai.h"

namespace fedledger {

// One sealed message as observed on the simulated wire.
struct WireRecord {
  std::string channel;  // update | ledger_submit | global_log | distribute
                        // | feedback | feedback_log
  Envelope envelope;
  Bytes wire;
  Bytes plaintext;  // kept for test oracles; protocol code never reads it
};

// Everything an edge node computed for its update in the latest round.
struct EdgeUpdate {
  NodeId node;
  Vector raw;       // training delta
  Vector clipped;   // after clipping
  Vector noised;    // after the Gaussian mechanism
  Vector weighted;  // n_samples * noised: what gets masked
  double update_norm = 0.0;  // |clipped|
  double epsilon = kInfinity;
  std::size_t n_samples = 0;
  MaskedUpdate masked;
};

struct Rejection {
  std::string party;
  std::string stage;  // channel | ledger | preprocess | budget
  std::string reason;
};

struct NodeRoundStats {
  NodeId node;
  bool participated = false;
  double epsilon = kInfinity;
  double w_local = 0.0;
  double w_global = 0.0;
  double agreement_rate = 0.0;
  double explanation_consistency = 0.0;
  std::size_t flagged = 0;
  double accuracy_gain = 0.0;
  double integrated_accuracy = 0.0;
  double integrated_fpr = 0.0;
};

struct AttackProbe {
  std::size_t injected = 0;
  std::size_t detected = 0;
};

struct RoundReport {
  std::uint64_t round = 0;
  bool aborted = false;
  std::string abort_reason;
  std::uint64_t model_version = 0;
  double global_accuracy = 0.0;
  double global_loss = 0.0;
  double global_fpr = 0.0;
  std::vector<NodeId> participants;
  std::map<NodeId, double> epsilon_charged;  // this round
  std::map<NodeId, double> epsilon_spent;    // cumulative
  std::size_t blocks_appended = 0;
  std::vector<Rejection> rejected;
  double agreement_rate_mean = 0.0;
  double explanation_consistency_mean = 0.0;
  double integrated_accuracy_mean = 0.0;
  double integrated_fpr_mean = 0.0;
  std::vector<NodeRoundStats> nodes;
  std::optional<AttackProbe> attacks;
};

nlohmann::json report_to_json(const RoundReport& r);

// Copy of the ledger writer's state for off-line probing: appends here never
// touch the simulation's chain.
struct LedgerSandbox {
  Chain chain;
  ReplayGuard seen;
  BudgetLedger budget{1.0};
  std::shared_ptr<const ValidatorPool> pool;
  ContractRules rules;
  std::size_t committee_size = 1;
  std::uint64_t seed = 0;
  std::uint64_t now = 0;

  Result<LedgerBlock, AppendFailure> append(std::span<const std::uint8_t> payload,
                                            const Digest& payload_hash,
                                            const BlockMeta& meta);
};

// Owns all mutable protocol state (budget ledger, nonce sets, chain, clock)
// and advances it one round at a time.
class Simulation {
 public:
  explicit Simulation(RunConfig cfg);
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  RoundReport run_round();

  const RunConfig& config() const { return cfg_; }
  const FleetDataset& fleet() const { return fleet_; }
  const std::vector<Sample>& test_set() const { return test_set_; }
  const LocalSplit& split(NodeId node) const { return splits_.at(node); }
  const ModelParams& global_model() const { return global_; }
  const Chain& chain() const { return chain_; }
  const BudgetLedger& budget() const { return budget_; }
  const KeyRegistry& keys() const { return keys_; }
  const ValidatorPool& validators() const { return *pool_; }
  std::uint64_t now() const { return now_; }
  std::uint64_t round() const { return round_; }

  // Latest round only.
  const std::vector<WireRecord>& trace() const { return trace_; }
  const std::vector<EdgeUpdate>& edge_updates() const { return edge_updates_; }

  // Payload hashes computed at the edge before sealing, per (round, node).
  const std::map<std::pair<std::uint64_t, NodeId>, Digest>& edge_hashes() const {
    return edge_hashes_;
  }
  const std::map<Digest, Bytes>& payload_store() const { return payload_store_; }
  const std::vector<nlohmann::json>& explanation_records() const {
    return explanations_;
  }

  Receiver& receiver(const std::string& party);
  LedgerSandbox ledger_sandbox() const;

 private:
  std::uint64_t tick(std::uint64_t phase) const;
  FreshnessTag fresh_tag(const std::string& from, std::uint64_t phase);
  const WireRecord& send(const std::string& from, const std::string& to,
                         const std::string& channel, const FreshnessTag& tag,
                         Bytes payload);
  // Delivers a recorded envelope to its receiver at `phase`; rejections are
  // noted in the report.
  std::optional<Bytes> deliver(const WireRecord& rec, std::uint64_t phase,
                               RoundReport& report);
  // C forwards a record to B over K_BC; B appends it to the chain.
  std::optional<LedgerBlock> log_record(const BlockMeta& meta, Bytes payload,
                                        std::uint64_t phase,
                                        RoundReport& report);
  void run_feedback(const std::map<NodeId, ModelParams>& received,
                    const GlobalUpdate& g, RoundReport& report);

  RunConfig cfg_;
  FleetDataset fleet_;
  std::map<NodeId, LocalSplit> splits_;
  std::map<NodeId, ModelParams> validator_models_;
  std::vector<Sample> test_set_;
  KeyRegistry keys_;
  std::map<std::string, Sender> senders_;
  std::map<std::string, Receiver> receivers_;
  std::shared_ptr<const ValidatorPool> pool_;
  BudgetLedger budget_;
  ContractState ledger_state_;
  Chain chain_;
  ModelParams global_;
  std::uint64_t round_ = 0;
  std::uint64_t now_ = 0;
  std::map<NodeId, std::vector<double>> loss_history_;

  std::vector<WireRecord> trace_;
  std::vector<EdgeUpdate> edge_updates_;
  std::map<std::pair<std::uint64_t, NodeId>, Digest> edge_hashes_;
  std::map<Digest, Bytes> payload_store_;
  std::vector<nlohmann::json> explanations_;
};

struct RunResult {
  std::vector<RoundReport> reports;
  Chain chain;
  ModelParams final_model;
  std::map<NodeId, double> epsilon_spent;
  std::vector<nlohmann::json> explanations;
};

RunResult run(const RunConfig& cfg);

// Output directory: FEDLEDGER_OUTPUT_DIR when set, else cfg.output_dir.
std::filesystem::path resolve_output_dir(const RunConfig& cfg);

// metrics.jsonl, summary.csv, chain.json, explanations.jsonl.
void write_artifacts(const RunResult& result, const std::filesystem::path& dir);

}  // namespace fedledger

#endif  // FEDLEDGER_ORCHESTRATOR_H_
