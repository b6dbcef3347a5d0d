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

#ifndef FEDLEDGER_LEDGER_H_
#define FEDLEDGER_LEDGER_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fedledger/channel.h"
#include "fedledger/common.h"
#include "fedledger/privacy.h"

namespace fedledger {

// H(M): SHA-256 over canonical bytes.
Digest canonical_hash(std::span<const std::uint8_t> payload);

enum class BlockKind : std::uint8_t {
  kGenesis = 0,
  kLocalUpdate = 1,
  kGlobalModel = 2,
  kFeedback = 3,  // integrated (local feedback + global) model
};

std::string_view to_string(BlockKind k);
std::optional<BlockKind> block_kind_from_string(std::string_view s);

struct BlockMeta {
  BlockKind kind = BlockKind::kGenesis;
  std::string origin;  // "P<n>" for node-originated records, "C" otherwise
  std::uint64_t round = 0;
  std::uint64_t model_version = 0;  // global version the record belongs to
  FreshnessTag freshness;
  double epsilon_charged = 0.0;
  std::uint64_t n_samples = 0;
  double update_norm = 0.0;  // clipped, pre-noise norm of a local update
  std::uint64_t recorded_at = 0;  // tick the ledger accepted the record

  friend bool operator==(const BlockMeta&, const BlockMeta&) = default;
};

struct Attestation {
  std::string validator_id;
  Digest signature{};

  friend bool operator==(const Attestation&, const Attestation&) = default;
};

struct LedgerBlock {
  std::uint64_t index = 0;
  Digest prev_hash{};
  Digest payload_hash{};
  BlockMeta meta;
  std::vector<Attestation> attestations;
  Digest block_hash{};

  friend bool operator==(const LedgerBlock&, const LedgerBlock&) = default;
};

using Chain = std::vector<LedgerBlock>;

Bytes canonical_meta(const BlockMeta& meta);
Bytes canonical_attestations(std::span<const Attestation> attestations);
// index || prev_hash || payload_hash || canonical(meta): what validators sign.
Bytes block_preimage(std::uint64_t index, const Digest& prev_hash,
                     const Digest& payload_hash, const BlockMeta& meta);
// H(preimage || canonical(attestations)).
Digest compute_block_hash(const LedgerBlock& block);

// Stake-weighted validator set.
struct ValidatorSet {
  std::map<std::string, double> stakes;
  double quorum_fraction = 2.0 / 3.0;

  // Throws std::invalid_argument on negative/non-finite stakes, zero total
  // stake, or a quorum fraction outside (1/2, 1].
  void validate() const;
};

// Stake-proportional sampling without replacement, deterministic per seed.
// Zero-stake validators are never chosen. Throws std::invalid_argument on an
// empty set or committee_size larger than the set.
std::vector<std::string> select_committee(const ValidatorSet& vset,
                                          std::uint64_t round_seed,
                                          std::size_t committee_size);

enum class ValidatorBehavior { kHonest, kRefuse, kFalseAttest };

std::string_view to_string(ValidatorBehavior b);
std::optional<ValidatorBehavior> validator_behavior_from_string(
    std::string_view s);

// Validators with their attestation secrets and (possibly Byzantine)
// behavior.
class ValidatorPool {
 public:
  ValidatorPool(ValidatorSet set, std::uint64_t secret_seed,
                std::map<std::string, ValidatorBehavior> behaviors = {});

  const ValidatorSet& set() const { return set_; }
  ValidatorBehavior behavior(const std::string& id) const;

  // What the validator returns when asked to attest `preimage`; nullopt
  // when it refuses. False attesters sign something else.
  std::optional<Attestation> attest(const std::string& id,
                                    std::span<const std::uint8_t> preimage) const;
  bool verify(const Attestation& a, std::span<const std::uint8_t> preimage) const;

 private:
  Digest sign(const std::string& id, std::span<const std::uint8_t> data) const;

  ValidatorSet set_;
  std::map<std::string, Bytes> secrets_;
  std::map<std::string, ValidatorBehavior> behaviors_;
};

// H(validator_id || preimage || secret).
Digest attestation_digest(std::string_view validator_id,
                          std::span<const std::uint8_t> preimage,
                          std::span<const std::uint8_t> secret);

struct ContractRules {
  std::uint64_t freshness_window = 20;
  double epsilon_cap = 20.0;
  double max_update_norm = 2.0;
  std::uint64_t max_declared_samples = 100000;

  void validate() const;
};

enum class RejectReason {
  kHashMismatch,
  kReplay,
  kStale,
  kOverBudget,
  kNormBound,
  kSampleCap,
};

std::string_view to_string(RejectReason r);

// Ledger-side admission state. The seen-nonce set belongs to the ledger (B),
// separate from any channel endpoint's replay guard.
struct ContractState {
  ReplayGuard seen;
  BudgetLedger* budget = nullptr;  // may be null when no budget applies
  std::uint64_t now = 0;
};

// All violated predicates, in RejectReason order; empty means accept. The
// budget, norm and sample-count rules apply to local updates only.
std::vector<RejectReason> contract_validate(const BlockMeta& meta,
                                            const Digest& payload_hash,
                                            std::span<const std::uint8_t> payload,
                                            const ContractRules& rules,
                                            const ContractState& state);

struct AppendFailure {
  enum class Kind { kContract, kQuorum };
  Kind kind = Kind::kContract;
  std::vector<RejectReason> reasons;  // contract failures
  double attesting_stake = 0.0;       // quorum failures
  double required_stake = 0.0;
};

std::string describe(const AppendFailure& f);

struct CommitteeConfig {
  std::size_t committee_size = 5;
  std::uint64_t seed = 0;  // per-block seed material
};

Chain make_genesis_chain(const Digest& genesis_payload_hash);

// Runs contract_validate, gathers attestations from a stake-weighted
// committee and appends iff the verified attesting stake reaches
// quorum_fraction of the committee's stake. On success the block is linked
// to the head, its freshness nonce is remembered and a local update's
// epsilon is charged to the budget. On failure nothing changes.
Result<LedgerBlock, AppendFailure> append_block(
    Chain& chain, std::span<const std::uint8_t> payload,
    const Digest& payload_hash, BlockMeta meta, const ValidatorPool& validators,
    const CommitteeConfig& committee, const ContractRules& rules,
    ContractState& state);

// nullopt when every link and block hash recomputes; otherwise the earliest
// inconsistent index.
std::optional<std::size_t> verify_chain(std::span<const LedgerBlock> chain);

// Attestation digests re-verified against the validator secrets.
std::optional<std::size_t> verify_attestations(std::span<const LedgerBlock> chain,
                                               const ValidatorPool& validators);

// Post-hoc admission audit: every non-genesis block re-checked against the
// rules (freshness, uniqueness, cumulative budget per origin, norm, sample
// cap, and payload hash when the payload is available).
struct AuditFinding {
  std::size_t index = 0;
  RejectReason reason = RejectReason::kHashMismatch;
};
std::vector<AuditFinding> audit_admission(
    std::span<const LedgerBlock> chain, const ContractRules& rules,
    const std::map<Digest, Bytes>* payloads = nullptr);

struct ProvenanceError {
  enum class Kind { kUnknownVersion, kVerificationFailed };
  Kind kind = Kind::kUnknownVersion;
  std::size_t bad_index = 0;
};

// Lineage of a global model version: the round's local-update blocks, its
// global-model block, then the feedback blocks for that version. Version 0
// is the genesis block alone. Fails if the chain prefix covering the lineage
// does not verify.
Result<std::vector<LedgerBlock>, ProvenanceError> provenance_query(
    std::span<const LedgerBlock> chain, std::uint64_t model_version);

// JSON array of blocks with hex digests.
nlohmann::json chain_to_json(std::span<const LedgerBlock> chain);
// Throws Error on malformed input.
Chain chain_from_json(const nlohmann::json& j);

}  // namespace fedledger

#endif  // FEDLEDGER_LEDGER_H_
