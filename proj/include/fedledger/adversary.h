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

#ifndef FEDLEDGER_ADVERSARY_H_
#define FEDLEDGER_ADVERSARY_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedledger/channel.h"
#include "fedledger/config.h"
#include "fedledger/ledger.h"
#include "fedledger/orchestrator.h"

namespace fedledger {

enum class AttackKind {
  kReplay,
  kTamperMessage,
  kTamperBlock,
  kSpoofNode,
  kPoisonUpdate,
  kEavesdrop,
  kImpersonate,
  kMitmSwap,
};

inline constexpr std::array<AttackKind, 8> kAllAttackKinds = {
    AttackKind::kReplay,       AttackKind::kTamperMessage,
    AttackKind::kTamperBlock,  AttackKind::kSpoofNode,
    AttackKind::kPoisonUpdate, AttackKind::kEavesdrop,
    AttackKind::kImpersonate,  AttackKind::kMitmSwap,
};

std::string_view to_string(AttackKind k);
std::optional<AttackKind> attack_kind_from_string(std::string_view s);

// Every hashed field of a ledger block, addressable bit by bit.
enum class BlockField {
  kIndex,
  kPrevHash,
  kPayloadHash,
  kKind,
  kOrigin,
  kRound,
  kModelVersion,
  kNonce,
  kTimestamp,
  kFreshnessRound,
  kEpsilon,
  kSamples,
  kUpdateNorm,
  kRecordedAt,
  kValidatorId,  // first attestation
  kSignature,    // first attestation
  kBlockHash,
};

inline constexpr std::array<BlockField, 17> kAllBlockFields = {
    BlockField::kIndex,         BlockField::kPrevHash,
    BlockField::kPayloadHash,   BlockField::kKind,
    BlockField::kOrigin,        BlockField::kRound,
    BlockField::kModelVersion,  BlockField::kNonce,
    BlockField::kTimestamp,     BlockField::kFreshnessRound,
    BlockField::kEpsilon,       BlockField::kSamples,
    BlockField::kUpdateNorm,    BlockField::kRecordedAt,
    BlockField::kValidatorId,   BlockField::kSignature,
    BlockField::kBlockHash,
};

std::string_view to_string(BlockField f);

// Number of addressable bits of `f` in `block`; 0 when the block has no
// such field (e.g. attestations on the genesis block).
std::size_t field_bits(const LedgerBlock& block, BlockField f);

// Flips bit `bit` (< field_bits) of the field. Throws std::out_of_range.
void mutate_block_field(LedgerBlock& block, BlockField f, std::size_t bit);

// A completed honest round as the adversary sees it.
struct Traffic {
  std::vector<WireRecord> messages;
  Chain chain;
  // Edge-side values; only poison_update (an insider) and the eavesdrop
  // leakage oracle use them.
  std::vector<EdgeUpdate> updates;
};

struct InjectOptions {
  double poison_factor = 100.0;
  // Keys the adversary holds: a compromised node's own keys for poisoning
  // and impersonation. Without it those attacks use fresh random keys.
  const KeyRegistry* insider_keys = nullptr;
};

struct Injection {
  Traffic traffic;                      // perturbed copy
  std::vector<std::size_t> adversarial;  // indices into traffic.messages
  std::optional<std::size_t> tampered_block;
  std::optional<BlockField> tampered_field;
  double poison_norm = 0.0;    // declared norm of the poisoned delta
  double original_norm = 0.0;  // clipped norm it was scaled from
  std::string notes;
};

// Throws std::invalid_argument for an unknown kind, an empty trace, or a
// trace without the records the attack needs.
Injection inject(AttackKind kind, const Traffic& traffic, std::uint64_t seed,
                 const InjectOptions& options = {});

// True when any 8-byte encoding (either byte order) of any coordinate in
// `values` appears verbatim in the wire bytes.
bool coordinates_visible(std::span<const double> values,
                         std::span<const WireRecord> wire);

struct AttackReport {
  AttackKind kind = AttackKind::kReplay;
  std::size_t injected = 0;
  std::size_t detected = 0;   // rejected with the expected outcome
  bool leaked = false;        // eavesdrop only
  std::string expected;
  std::map<std::string, std::size_t> outcomes;
  std::size_t adversarial_opened = 0;    // external attacker envelopes opened
  std::size_t adversarial_appended = 0;  // adversarial blocks appended
  std::string notes;

  bool passed() const;
};

// Poisoning just inside the norm bound is accepted by design: the bound is
// the only poisoning defense.
struct BoundaryProbe {
  double factor = 1.0;
  double declared_norm = 0.0;
  double bound = 0.0;
  bool accepted = false;
  bool expected_accepted = false;
  std::string notes;
};

struct AttackSuiteResult {
  std::vector<AttackReport> reports;  // one per kind, summed over seeds
  std::vector<BoundaryProbe> probes;  // one per seed

  bool all_passed() const;
};

// Runs cfg.attacks.baseline_rounds honest rounds per seed, then
// cfg.attacks.injections injections of every kind against copies of the
// receivers and ledger.
AttackSuiteResult run_attack_suite(const RunConfig& cfg,
                                   std::span<const std::uint64_t> seeds);

nlohmann::json report_to_json(const AttackReport& r);
nlohmann::json suite_to_json(const AttackSuiteResult& s);

}  // namespace fedledger

#endif  // FEDLEDGER_ADVERSARY_H_
