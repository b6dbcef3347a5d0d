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

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedledger/ledger.h"
#include "test_util.h"

namespace fedledger {
namespace {

using testing::bytes_of;

ValidatorSet equal_stakes(std::size_t n) {
  ValidatorSet v;
  for (std::size_t i = 0; i < n; ++i) v.stakes["v" + std::to_string(i)] = 1.0;
  return v;
}

class LedgerTest : public ::testing::Test {
 protected:
  ValidatorPool pool_{equal_stakes(3), 11};
  ContractRules rules_;
  BudgetLedger budget_{20.0};
  ContractState state_{{}, &budget_, 0};
  Chain chain_ = make_genesis_chain(canonical_hash(bytes_of("genesis")));
  std::uint64_t next_nonce_ = 1;

  BlockMeta meta(BlockKind kind, std::string origin, std::uint64_t round,
                 std::uint64_t version) {
    BlockMeta m;
    m.kind = kind;
    m.origin = std::move(origin);
    m.round = round;
    m.model_version = version;
    m.freshness.timestamp = state_.now;
    m.freshness.round = round;
    const std::uint64_t n = next_nonce_++;
    for (int b = 0; b < 8; ++b) m.freshness.nonce[b] = static_cast<std::uint8_t>(n >> (8 * b));
    if (kind == BlockKind::kLocalUpdate) {
      m.epsilon_charged = 1.0;
      m.n_samples = 100;
      m.update_norm = 0.5;
    }
    return m;
  }

  Result<LedgerBlock, AppendFailure> append(const BlockMeta& m, const Bytes& payload) {
    return append_block(chain_, payload, canonical_hash(payload), m, pool_,
                        {3, chain_.size()}, rules_, state_);
  }

  void append_ok(const BlockMeta& m, const std::string& payload) {
    const auto r = append(m, bytes_of(payload));
    ASSERT_TRUE(r.ok()) << describe(r.error());
  }
};

TEST(CanonicalHash, DeterministicAndSensitive) {
  EXPECT_EQ(canonical_hash(bytes_of("abc")), canonical_hash(bytes_of("abc")));
  EXPECT_NE(canonical_hash(bytes_of("abc")), canonical_hash(bytes_of("abd")));
}

TEST(Committee, StakeProportionalSelection) {
  ValidatorSet v;
  v.stakes = {{"a", 1.0}, {"b", 1.0}, {"c", 2.0}};
  std::map<std::string, int> hits;
  const int n = 100000;
  for (int i = 0; i < n; ++i) hits[select_committee(v, derive_seed(3, {std::uint64_t(i)}), 1)[0]]++;
  EXPECT_NEAR(hits["a"] / double(n), 0.25, 0.01);
  EXPECT_NEAR(hits["b"] / double(n), 0.25, 0.01);
  EXPECT_NEAR(hits["c"] / double(n), 0.50, 0.01);
}

TEST(Committee, ZeroStakeNeverChosenAndSingleValidatorAlwaysChosen) {
  ValidatorSet v;
  v.stakes = {{"a", 0.0}, {"b", 3.0}};
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto c = select_committee(v, s, 2);
    ASSERT_EQ(c.size(), 1u);
    ASSERT_EQ(c[0], "b");
  }
  ValidatorSet one;
  one.stakes = {{"solo", 5.0}};
  EXPECT_EQ(select_committee(one, 9, 1), std::vector<std::string>{"solo"});
  EXPECT_THROW(select_committee(one, 9, 2), std::invalid_argument);
  EXPECT_THROW(select_committee(ValidatorSet{}, 9, 1), std::invalid_argument);
}

TEST(Committee, DeterministicPerSeedWithoutDuplicates) {
  const ValidatorSet v = equal_stakes(7);
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto c = select_committee(v, s, 4);
    ASSERT_EQ(c, select_committee(v, s, 4));
    std::set<std::string> uniq(c.begin(), c.end());
    ASSERT_EQ(uniq.size(), 4u);
  }
}

TEST_F(LedgerTest, AcceptsValidLocalUpdateAndChargesBudget) {
  const auto r = append(meta(BlockKind::kLocalUpdate, "P1", 0, 1), bytes_of("u1"));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(chain_.size(), 2u);
  EXPECT_EQ(chain_[1].prev_hash, chain_[0].block_hash);
  EXPECT_EQ(chain_[1].payload_hash, canonical_hash(bytes_of("u1")));
  EXPECT_DOUBLE_EQ(budget_.spent({1}), 1.0);
  EXPECT_EQ(chain_[1].attestations.size(), 3u);
  EXPECT_EQ(verify_attestations(chain_, pool_), std::nullopt);
}

TEST_F(LedgerTest, RejectsReplayedNonce) {
  const BlockMeta m = meta(BlockKind::kLocalUpdate, "P1", 0, 1);
  ASSERT_TRUE(append(m, bytes_of("u1")).ok());
  const auto r = append(m, bytes_of("u1"));
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.error().reasons, std::vector<RejectReason>{RejectReason::kReplay});
  EXPECT_EQ(chain_.size(), 2u);
  EXPECT_DOUBLE_EQ(budget_.spent({1}), 1.0);
}

TEST_F(LedgerTest, RejectsTenfoldNormAndHashMismatchAndStale) {
  BlockMeta big = meta(BlockKind::kLocalUpdate, "P1", 0, 1);
  big.update_norm = 10 * rules_.max_update_norm;
  auto r = append(big, bytes_of("u"));
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.error().reasons, std::vector<RejectReason>{RejectReason::kNormBound});

  const Bytes p = bytes_of("payload");
  r = append_block(chain_, p, canonical_hash(bytes_of("other")),
                   meta(BlockKind::kGlobalModel, "C", 0, 1), pool_, {3, 0}, rules_, state_);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.error().reasons, std::vector<RejectReason>{RejectReason::kHashMismatch});

  const BlockMeta old = meta(BlockKind::kGlobalModel, "C", 0, 1);
  state_.now = rules_.freshness_window + 1;
  r = append(old, bytes_of("g"));
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.error().reasons, std::vector<RejectReason>{RejectReason::kStale});
  EXPECT_EQ(chain_.size(), 1u);
}

TEST_F(LedgerTest, RejectsOverBudgetAndBadSampleCount) {
  BlockMeta m = meta(BlockKind::kLocalUpdate, "P2", 0, 1);
  m.epsilon_charged = 20.5;
  m.n_samples = 0;
  const auto r = append(m, bytes_of("u"));
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.error().reasons,
            (std::vector<RejectReason>{RejectReason::kOverBudget, RejectReason::kSampleCap}));
}

TEST(Quorum, OneHonestOfThreeIsNotEnough) {
  ValidatorPool pool(equal_stakes(3), 5,
                     {{"v0", ValidatorBehavior::kRefuse}, {"v1", ValidatorBehavior::kFalseAttest}});
  Chain chain = make_genesis_chain(canonical_hash(bytes_of("g")));
  ContractState state;
  BlockMeta m;
  m.kind = BlockKind::kGlobalModel;
  m.origin = "C";
  const Bytes p = bytes_of("model");
  const auto r = append_block(chain, p, canonical_hash(p), m, pool, {3, 1}, ContractRules{}, state);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.error().kind, AppendFailure::Kind::kQuorum);
  EXPECT_DOUBLE_EQ(r.error().attesting_stake, 1.0);
  EXPECT_EQ(chain.size(), 1u);
  EXPECT_EQ(state.seen.size(), 0u);

  ValidatorPool two_honest(equal_stakes(3), 5, {{"v0", ValidatorBehavior::kRefuse}});
  EXPECT_TRUE(
      append_block(chain, p, canonical_hash(p), m, two_honest, {3, 1}, ContractRules{}, state)
          .ok());
}

TEST_F(LedgerTest, HundredBlockChainVerifiesAndLocatesMutation) {
  for (std::uint64_t i = 0; i < 100; ++i) {
    state_.now = i;
    append_ok(meta(BlockKind::kGlobalModel, "C", i, i + 1), "m" + std::to_string(i));
  }
  ASSERT_EQ(chain_.size(), 101u);
  EXPECT_EQ(verify_chain(chain_), std::nullopt);
  EXPECT_TRUE(audit_admission(chain_, rules_).empty());

  Chain bad = chain_;
  bad[17].meta.round ^= 1;
  EXPECT_EQ(verify_chain(bad), std::optional<std::size_t>(17));
  bad = chain_;
  bad[17].payload_hash[0] ^= 0x80;
  EXPECT_EQ(verify_chain(bad), std::optional<std::size_t>(17));
  bad = chain_;
  bad[17].attestations[0].signature[3] ^= 1;
  EXPECT_EQ(verify_chain(bad), std::optional<std::size_t>(17));
  bad = chain_;
  bad[40].prev_hash[0] ^= 1;
  EXPECT_EQ(verify_chain(bad), std::optional<std::size_t>(40));
}

TEST_F(LedgerTest, ProvenanceOfTwoNodeRound) {
  append_ok(meta(BlockKind::kLocalUpdate, "P1", 0, 1), "u1");
  append_ok(meta(BlockKind::kLocalUpdate, "P2", 0, 1), "u2");
  append_ok(meta(BlockKind::kGlobalModel, "C", 0, 1), "g1");
  append_ok(meta(BlockKind::kFeedback, "P1", 0, 1), "f1");
  append_ok(meta(BlockKind::kLocalUpdate, "P1", 1, 2), "u3");

  const auto v1 = provenance_query(chain_, 1);
  ASSERT_TRUE(v1.ok());
  ASSERT_EQ(v1.value().size(), 4u);
  EXPECT_EQ(v1.value()[0].meta.origin, "P1");
  EXPECT_EQ(v1.value()[1].meta.origin, "P2");
  EXPECT_EQ(v1.value()[2].meta.kind, BlockKind::kGlobalModel);
  EXPECT_EQ(v1.value()[3].meta.kind, BlockKind::kFeedback);

  const auto v0 = provenance_query(chain_, 0);
  ASSERT_TRUE(v0.ok());
  ASSERT_EQ(v0.value().size(), 1u);
  EXPECT_EQ(v0.value()[0].meta.kind, BlockKind::kGenesis);

  EXPECT_FALSE(provenance_query(chain_, 9).ok());
  EXPECT_EQ(provenance_query(chain_, 9).error().kind, ProvenanceError::Kind::kUnknownVersion);

  Chain bad = chain_;
  bad[2].meta.n_samples = 7;
  const auto t = provenance_query(bad, 1);
  ASSERT_FALSE(t.ok());
  EXPECT_EQ(t.error().kind, ProvenanceError::Kind::kVerificationFailed);
  EXPECT_EQ(t.error().bad_index, 2u);
}

TEST_F(LedgerTest, JsonRoundTripPreservesChain) {
  append_ok(meta(BlockKind::kLocalUpdate, "P3", 0, 1), "u");
  append_ok(meta(BlockKind::kGlobalModel, "C", 0, 1), "g");
  const Chain back = chain_from_json(chain_to_json(chain_));
  EXPECT_EQ(back, chain_);
  EXPECT_THROW(chain_from_json(nlohmann::json::parse(R"([{"index": "x"}])")), Error);
}

TEST_F(LedgerTest, AuditFlagsBlocksThatBypassedTheContract) {
  append_ok(meta(BlockKind::kLocalUpdate, "P1", 0, 1), "u1");
  std::map<Digest, Bytes> payloads = {{canonical_hash(bytes_of("u1")), bytes_of("u1")}};
  EXPECT_TRUE(audit_admission(chain_, rules_, &payloads).empty());

  // Forge an over-norm block and re-link it so the hash chain still verifies.
  LedgerBlock forged = chain_.back();
  forged.index = chain_.size();
  forged.prev_hash = chain_.back().block_hash;
  forged.meta.update_norm = 50.0;
  forged.meta.freshness.nonce[15] ^= 1;
  forged.block_hash = compute_block_hash(forged);
  chain_.push_back(forged);
  ASSERT_EQ(verify_chain(chain_), std::nullopt);
  const auto findings = audit_admission(chain_, rules_);
  ASSERT_FALSE(findings.empty());
  EXPECT_EQ(findings[0].index, 2u);
  EXPECT_EQ(findings[0].reason, RejectReason::kNormBound);
}

}  // namespace
}  // namespace fedledger
