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

#include "fedledger/ledger.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "fedledger/crypto.h"
#include "fedledger/encoding.h"
#include "fedledger/rng.h"

namespace fedledger {
namespace {

constexpr std::uint64_t kTagValidatorSecret = 0x76736563;
// Relative slack on the quorum comparison so that e.g. 2 of 3 equal stakes
// meets a 2/3 quorum despite rounding in 2/3 * 3.
constexpr double kQuorumSlack = 1e-12;

Bytes validator_secret(std::uint64_t seed, const std::string& id) {
  ByteWriter w;
  w.str("fedledger-validator").u64(derive_seed(seed, {kTagValidatorSecret})).str(id);
  const Digest d = crypto::sha256(w.data());
  return {d.begin(), d.end()};
}

}  // namespace

Digest canonical_hash(std::span<const std::uint8_t> payload) {
  return crypto::sha256(payload);
}

std::string_view to_string(BlockKind k) {
  switch (k) {
    case BlockKind::kGenesis: return "genesis";
    case BlockKind::kLocalUpdate: return "local_update";
    case BlockKind::kGlobalModel: return "global_model";
    case BlockKind::kFeedback: return "feedback";
  }
  return "unknown";
}

std::optional<BlockKind> block_kind_from_string(std::string_view s) {
  for (BlockKind k : {BlockKind::kGenesis, BlockKind::kLocalUpdate,
                      BlockKind::kGlobalModel, BlockKind::kFeedback}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

Bytes canonical_meta(const BlockMeta& meta) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(meta.kind)).str(meta.origin).u64(meta.round);
  w.u64(meta.model_version);
  write_freshness(w, meta.freshness);
  w.f64(meta.epsilon_charged).u64(meta.n_samples).f64(meta.update_norm);
  w.u64(meta.recorded_at);
  return std::move(w).take();
}

Bytes canonical_attestations(std::span<const Attestation> attestations) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(attestations.size()));
  for (const auto& a : attestations) w.str(a.validator_id).digest(a.signature);
  return std::move(w).take();
}

Bytes block_preimage(std::uint64_t index, const Digest& prev_hash,
                     const Digest& payload_hash, const BlockMeta& meta) {
  ByteWriter w;
  w.u64(index).digest(prev_hash).digest(payload_hash).bytes(canonical_meta(meta));
  return std::move(w).take();
}

Digest compute_block_hash(const LedgerBlock& block) {
  return crypto::Sha256()
      .update(block_preimage(block.index, block.prev_hash, block.payload_hash,
                             block.meta))
      .update(canonical_attestations(block.attestations))
      .finish();
}

void ValidatorSet::validate() const {
  if (stakes.empty()) throw std::invalid_argument("empty validator set");
  double total = 0.0;
  for (const auto& [id, stake] : stakes) {
    if (!(stake >= 0.0) || !std::isfinite(stake)) {
      throw std::invalid_argument("stake of " + id + " must be finite and >= 0");
    }
    total += stake;
  }
  if (!(total > 0.0)) throw std::invalid_argument("total stake must be > 0");
  if (!(quorum_fraction > 0.5 && quorum_fraction <= 1.0)) {
    throw std::invalid_argument("quorum_fraction must be in (1/2, 1]");
  }
}

std::vector<std::string> select_committee(const ValidatorSet& vset,
                                          std::uint64_t round_seed,
                                          std::size_t committee_size) {
  if (vset.stakes.empty()) throw std::invalid_argument("empty validator set");
  if (committee_size == 0 || committee_size > vset.stakes.size()) {
    throw std::invalid_argument("committee_size must be in [1, validator count]");
  }
  std::vector<std::pair<std::string, double>> pool(vset.stakes.begin(),
                                                   vset.stakes.end());
  Rng rng = make_rng(round_seed);
  std::vector<std::string> committee;
  committee.reserve(committee_size);
  while (committee.size() < committee_size) {
    double total = 0.0;
    for (const auto& [id, stake] : pool) total += stake;
    if (!(total > 0.0)) break;  // only zero-stake validators remain
    const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    double cumulative = 0.0;
    std::size_t pick = pool.size();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      cumulative += pool[i].second;
      if (pool[i].second > 0.0 && u < cumulative) {
        pick = i;
        break;
      }
    }
    if (pick == pool.size()) {
      // u landed on the rounding edge of the last bucket.
      for (std::size_t i = pool.size(); i-- > 0;) {
        if (pool[i].second > 0.0) {
          pick = i;
          break;
        }
      }
    }
    committee.push_back(pool[pick].first);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return committee;
}

std::string_view to_string(ValidatorBehavior b) {
  switch (b) {
    case ValidatorBehavior::kHonest: return "honest";
    case ValidatorBehavior::kRefuse: return "refuse";
    case ValidatorBehavior::kFalseAttest: return "false_attest";
  }
  return "unknown";
}

std::optional<ValidatorBehavior> validator_behavior_from_string(
    std::string_view s) {
  for (auto b : {ValidatorBehavior::kHonest, ValidatorBehavior::kRefuse,
                 ValidatorBehavior::kFalseAttest}) {
    if (to_string(b) == s) return b;
  }
  return std::nullopt;
}

Digest attestation_digest(std::string_view validator_id,
                          std::span<const std::uint8_t> preimage,
                          std::span<const std::uint8_t> secret) {
  ByteWriter w;
  w.str(validator_id).bytes(preimage).bytes(secret);
  return crypto::sha256(w.data());
}

ValidatorPool::ValidatorPool(ValidatorSet set, std::uint64_t secret_seed,
                             std::map<std::string, ValidatorBehavior> behaviors)
    : set_(std::move(set)), behaviors_(std::move(behaviors)) {
  set_.validate();
  for (const auto& [id, behavior] : behaviors_) {
    if (!set_.stakes.contains(id)) {
      throw std::invalid_argument("behavior for unknown validator " + id);
    }
  }
  for (const auto& [id, stake] : set_.stakes) {
    secrets_[id] = validator_secret(secret_seed, id);
  }
}

ValidatorBehavior ValidatorPool::behavior(const std::string& id) const {
  auto it = behaviors_.find(id);
  return it == behaviors_.end() ? ValidatorBehavior::kHonest : it->second;
}

Digest ValidatorPool::sign(const std::string& id,
                           std::span<const std::uint8_t> data) const {
  return attestation_digest(id, data, secrets_.at(id));
}

std::optional<Attestation> ValidatorPool::attest(
    const std::string& id, std::span<const std::uint8_t> preimage) const {
  switch (behavior(id)) {
    case ValidatorBehavior::kHonest:
      return Attestation{id, sign(id, preimage)};
    case ValidatorBehavior::kRefuse:
      return std::nullopt;
    case ValidatorBehavior::kFalseAttest: {
      Bytes forged(preimage.begin(), preimage.end());
      forged.push_back(0xff);
      return Attestation{id, sign(id, forged)};
    }
  }
  return std::nullopt;
}

bool ValidatorPool::verify(const Attestation& a,
                           std::span<const std::uint8_t> preimage) const {
  auto it = secrets_.find(a.validator_id);
  if (it == secrets_.end()) return false;
  return attestation_digest(a.validator_id, preimage, it->second) == a.signature;
}

void ContractRules::validate() const {
  if (freshness_window == 0) throw std::invalid_argument("freshness_window must be > 0");
  if (!(epsilon_cap > 0.0)) throw std::invalid_argument("epsilon_cap must be > 0");
  if (!(max_update_norm > 0.0)) {
    throw std::invalid_argument("max_update_norm must be > 0");
  }
  if (max_declared_samples == 0) {
    throw std::invalid_argument("max_declared_samples must be > 0");
  }
}

std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::kHashMismatch: return "hash_mismatch";
    case RejectReason::kReplay: return "replay";
    case RejectReason::kStale: return "stale";
    case RejectReason::kOverBudget: return "over_budget";
    case RejectReason::kNormBound: return "norm_bound";
    case RejectReason::kSampleCap: return "sample_cap";
  }
  return "unknown";
}

std::vector<RejectReason> contract_validate(const BlockMeta& meta,
                                            const Digest& payload_hash,
                                            std::span<const std::uint8_t> payload,
                                            const ContractRules& rules,
                                            const ContractState& state) {
  std::vector<RejectReason> reasons;
  if (canonical_hash(payload) != payload_hash) {
    reasons.push_back(RejectReason::kHashMismatch);
  }
  if (state.seen.seen(meta.freshness.nonce)) {
    reasons.push_back(RejectReason::kReplay);
  }
  const std::uint64_t ts = meta.freshness.timestamp;
  if (ts > state.now || state.now - ts > rules.freshness_window) {
    reasons.push_back(RejectReason::kStale);
  }
  if (meta.kind == BlockKind::kLocalUpdate) {
    const auto node = parse_party(meta.origin);
    const double spent =
        (state.budget != nullptr && node) ? state.budget->spent(*node) : 0.0;
    const double cap = state.budget != nullptr
                           ? std::min(rules.epsilon_cap, state.budget->cap())
                           : rules.epsilon_cap;
    if (!(meta.epsilon_charged >= 0.0) || !std::isfinite(meta.epsilon_charged) ||
        spent + meta.epsilon_charged > cap) {
      reasons.push_back(RejectReason::kOverBudget);
    }
    if (!(meta.update_norm <= rules.max_update_norm)) {
      reasons.push_back(RejectReason::kNormBound);
    }
    if (meta.n_samples == 0 || meta.n_samples > rules.max_declared_samples) {
      reasons.push_back(RejectReason::kSampleCap);
    }
  }
  return reasons;
}

std::string describe(const AppendFailure& f) {
  std::ostringstream out;
  if (f.kind == AppendFailure::Kind::kQuorum) {
    out << "quorum: attesting stake " << f.attesting_stake << " < required "
        << f.required_stake;
    return out.str();
  }
  out << "contract:";
  for (auto r : f.reasons) out << ' ' << to_string(r);
  return out.str();
}

Chain make_genesis_chain(const Digest& genesis_payload_hash) {
  LedgerBlock genesis;
  genesis.index = 0;
  genesis.payload_hash = genesis_payload_hash;
  genesis.meta.kind = BlockKind::kGenesis;
  genesis.meta.origin = kAggregatorParty;
  genesis.block_hash = compute_block_hash(genesis);
  return Chain{std::move(genesis)};
}

Result<LedgerBlock, AppendFailure> append_block(
    Chain& chain, std::span<const std::uint8_t> payload,
    const Digest& payload_hash, BlockMeta meta, const ValidatorPool& validators,
    const CommitteeConfig& committee, const ContractRules& rules,
    ContractState& state) {
  if (chain.empty()) throw std::invalid_argument("chain has no genesis block");
  meta.recorded_at = state.now;

  std::vector<RejectReason> reasons =
      contract_validate(meta, payload_hash, payload, rules, state);
  if (!reasons.empty()) {
    AppendFailure f;
    f.kind = AppendFailure::Kind::kContract;
    f.reasons = std::move(reasons);
    return f;
  }

  LedgerBlock block;
  block.index = chain.size();
  block.prev_hash = chain.back().block_hash;
  block.payload_hash = payload_hash;
  block.meta = std::move(meta);
  const Bytes preimage = block_preimage(block.index, block.prev_hash,
                                        block.payload_hash, block.meta);

  const ValidatorSet& vset = validators.set();
  const std::size_t size = std::min(committee.committee_size, vset.stakes.size());
  double committee_stake = 0.0;
  double attesting_stake = 0.0;
  for (const auto& id : select_committee(vset, committee.seed, size)) {
    const double stake = vset.stakes.at(id);
    committee_stake += stake;
    std::optional<Attestation> a = validators.attest(id, preimage);
    if (a && validators.verify(*a, preimage)) {
      attesting_stake += stake;
      block.attestations.push_back(std::move(*a));
    }
  }
  const double required = vset.quorum_fraction * committee_stake;
  if (attesting_stake < required * (1.0 - kQuorumSlack)) {
    AppendFailure f;
    f.kind = AppendFailure::Kind::kQuorum;
    f.attesting_stake = attesting_stake;
    f.required_stake = required;
    return f;
  }

  block.block_hash = compute_block_hash(block);
  state.seen.remember(block.meta.freshness.nonce);
  if (block.meta.kind == BlockKind::kLocalUpdate && state.budget != nullptr &&
      block.meta.epsilon_charged > 0.0) {
    const auto node = parse_party(block.meta.origin);
    if (!node || state.budget->charge(*node, block.meta.epsilon_charged) !=
                     BudgetLedger::Charge::kAccepted) {
      throw Error("budget charge failed after contract acceptance");
    }
  }
  chain.push_back(block);
  return block;
}

std::optional<std::size_t> verify_chain(std::span<const LedgerBlock> chain) {
  Digest expected_prev{};
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const LedgerBlock& b = chain[k];
    if (b.index != k || b.prev_hash != expected_prev ||
        compute_block_hash(b) != b.block_hash) {
      return k;
    }
    expected_prev = b.block_hash;
  }
  return std::nullopt;
}

std::optional<std::size_t> verify_attestations(std::span<const LedgerBlock> chain,
                                               const ValidatorPool& validators) {
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const LedgerBlock& b = chain[k];
    const Bytes preimage =
        block_preimage(b.index, b.prev_hash, b.payload_hash, b.meta);
    for (const auto& a : b.attestations) {
      if (!validators.verify(a, preimage)) return k;
    }
  }
  return std::nullopt;
}

std::vector<AuditFinding> audit_admission(std::span<const LedgerBlock> chain,
                                          const ContractRules& rules,
                                          const std::map<Digest, Bytes>* payloads) {
  std::vector<AuditFinding> findings;
  std::set<Nonce> nonces;
  std::map<std::string, double> spent;
  for (std::size_t k = 1; k < chain.size(); ++k) {
    const LedgerBlock& b = chain[k];
    const BlockMeta& m = b.meta;
    auto flag = [&](RejectReason r) { findings.push_back({k, r}); };
    if (payloads != nullptr) {
      auto it = payloads->find(b.payload_hash);
      if (it == payloads->end() || canonical_hash(it->second) != b.payload_hash) {
        flag(RejectReason::kHashMismatch);
      }
    }
    if (!nonces.insert(m.freshness.nonce).second) flag(RejectReason::kReplay);
    if (m.freshness.timestamp > m.recorded_at ||
        m.recorded_at - m.freshness.timestamp > rules.freshness_window) {
      flag(RejectReason::kStale);
    }
    if (m.kind == BlockKind::kLocalUpdate) {
      spent[m.origin] += m.epsilon_charged;
      if (spent[m.origin] > rules.epsilon_cap) flag(RejectReason::kOverBudget);
      if (!(m.update_norm <= rules.max_update_norm)) flag(RejectReason::kNormBound);
      if (m.n_samples == 0 || m.n_samples > rules.max_declared_samples) {
        flag(RejectReason::kSampleCap);
      }
    }
  }
  return findings;
}

Result<std::vector<LedgerBlock>, ProvenanceError> provenance_query(
    std::span<const LedgerBlock> chain, std::uint64_t model_version) {
  std::optional<std::size_t> anchor;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const BlockMeta& m = chain[k].meta;
    const bool is_anchor =
        model_version == 0 ? m.kind == BlockKind::kGenesis
                           : (m.kind == BlockKind::kGlobalModel &&
                              m.model_version == model_version);
    if (is_anchor) {
      anchor = k;
      break;
    }
  }
  if (!anchor) return ProvenanceError{ProvenanceError::Kind::kUnknownVersion, 0};

  std::vector<std::size_t> picked;
  if (model_version != 0) {
    const std::uint64_t round = chain[*anchor].meta.round;
    for (std::size_t k = 0; k < *anchor; ++k) {
      const BlockMeta& m = chain[k].meta;
      if (m.kind == BlockKind::kLocalUpdate && m.round == round) picked.push_back(k);
    }
  }
  picked.push_back(*anchor);
  if (model_version != 0) {
    for (std::size_t k = *anchor + 1; k < chain.size(); ++k) {
      const BlockMeta& m = chain[k].meta;
      if (m.kind == BlockKind::kFeedback && m.model_version == model_version) {
        picked.push_back(k);
      }
    }
  }

  if (auto bad = verify_chain(chain.first(picked.back() + 1))) {
    return ProvenanceError{ProvenanceError::Kind::kVerificationFailed, *bad};
  }
  std::vector<LedgerBlock> lineage;
  lineage.reserve(picked.size());
  for (std::size_t k : picked) lineage.push_back(chain[k]);
  return lineage;
}

nlohmann::json chain_to_json(std::span<const LedgerBlock> chain) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& b : chain) {
    nlohmann::json atts = nlohmann::json::array();
    for (const auto& a : b.attestations) {
      atts.push_back({{"validator", a.validator_id},
                      {"signature", to_hex(a.signature)}});
    }
    const BlockMeta& m = b.meta;
    out.push_back({
        {"index", b.index},
        {"prev_hash", to_hex(b.prev_hash)},
        {"payload_hash", to_hex(b.payload_hash)},
        {"meta",
         {{"kind", to_string(m.kind)},
          {"origin", m.origin},
          {"round", m.round},
          {"model_version", m.model_version},
          {"freshness",
           {{"nonce", to_hex(m.freshness.nonce)},
            {"timestamp", m.freshness.timestamp},
            {"round", m.freshness.round}}},
          {"epsilon_charged", m.epsilon_charged},
          {"n_samples", m.n_samples},
          {"update_norm", m.update_norm},
          {"recorded_at", m.recorded_at}}},
        {"attestations", std::move(atts)},
        {"block_hash", to_hex(b.block_hash)},
    });
  }
  return out;
}

Chain chain_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error("chain JSON must be an array");
  Chain chain;
  try {
    for (const auto& jb : j) {
      LedgerBlock b;
      b.index = jb.at("index").get<std::uint64_t>();
      b.prev_hash = digest_from_hex(jb.at("prev_hash").get<std::string>());
      b.payload_hash = digest_from_hex(jb.at("payload_hash").get<std::string>());
      const auto& jm = jb.at("meta");
      auto kind = block_kind_from_string(jm.at("kind").get<std::string>());
      if (!kind) throw Error("unknown block kind");
      b.meta.kind = *kind;
      b.meta.origin = jm.at("origin").get<std::string>();
      b.meta.round = jm.at("round").get<std::uint64_t>();
      b.meta.model_version = jm.at("model_version").get<std::uint64_t>();
      const auto& jf = jm.at("freshness");
      Bytes nonce = from_hex(jf.at("nonce").get<std::string>());
      if (nonce.size() != b.meta.freshness.nonce.size()) {
        throw Error("nonce must be 16 bytes");
      }
      std::copy(nonce.begin(), nonce.end(), b.meta.freshness.nonce.begin());
      b.meta.freshness.timestamp = jf.at("timestamp").get<std::uint64_t>();
      b.meta.freshness.round = jf.at("round").get<std::uint64_t>();
      b.meta.epsilon_charged = jm.at("epsilon_charged").get<double>();
      b.meta.n_samples = jm.at("n_samples").get<std::uint64_t>();
      b.meta.update_norm = jm.at("update_norm").get<double>();
      b.meta.recorded_at = jm.at("recorded_at").get<std::uint64_t>();
      for (const auto& ja : jb.at("attestations")) {
        b.attestations.push_back(
            {ja.at("validator").get<std::string>(),
             digest_from_hex(ja.at("signature").get<std::string>())});
      }
      b.block_hash = digest_from_hex(jb.at("block_hash").get<std::string>());
      chain.push_back(std::move(b));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed chain JSON: ") + e.what());
  }
  return chain;
}

}  // namespace fedledger
