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

#include <memory>
#include <vector>

#include "fedledger/adversary.h"
#include "fedledger/encoding.h"
#include "fedledger/kernels.h"

namespace fedledger {
namespace {

RunConfig small_config() {
  RunConfig c;
  c.rounds = 2;
  c.fleet.n_nodes = 3;
  c.fleet.samples_per_node = 100;
  c.fleet.feature_dim = 4;
  c.test_samples = 300;
  c.validator_epochs = 5;
  c.epochs = 2;
  c.attacks.baseline_rounds = 2;
  c.attacks.injections = 10;
  return c;
}

class AdversaryTest : public ::testing::Test {
 protected:
  void SetUp() override {
    sim_ = std::make_unique<Simulation>(small_config());
    sim_->run_round();
    traffic_.messages = sim_->trace();
    traffic_.chain = sim_->chain();
    traffic_.updates = sim_->edge_updates();
  }
  std::unique_ptr<Simulation> sim_;
  Traffic traffic_;
};

int bit_distance(const Bytes& a, const Bytes& b) {
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += __builtin_popcount(a[i] ^ b[i]);
  return d;
}

TEST_F(AdversaryTest, ReplayAppendsADuplicate) {
  const Injection inj = inject(AttackKind::kReplay, traffic_, 1);
  ASSERT_EQ(inj.traffic.messages.size(), traffic_.messages.size() + 1);
  ASSERT_EQ(inj.adversarial.size(), 1u);
  const WireRecord& dup = inj.traffic.messages[inj.adversarial[0]];
  bool found = false;
  for (const auto& m : traffic_.messages) found |= m.wire == dup.wire;
  EXPECT_TRUE(found);
}

TEST_F(AdversaryTest, TamperMessageFlipsExactlyOneBit) {
  const Injection inj = inject(AttackKind::kTamperMessage, traffic_, 2);
  ASSERT_EQ(inj.traffic.messages.size(), traffic_.messages.size());
  ASSERT_EQ(inj.adversarial.size(), 1u);
  const std::size_t i = inj.adversarial[0];
  EXPECT_EQ(bit_distance(inj.traffic.messages[i].envelope.ciphertext,
                         traffic_.messages[i].envelope.ciphertext),
            1);
}

TEST_F(AdversaryTest, TamperBlockBreaksVerificationAtTheTamperedIndex) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Injection inj = inject(AttackKind::kTamperBlock, traffic_, s);
    ASSERT_TRUE(inj.tampered_block.has_value());
    ASSERT_EQ(verify_chain(inj.traffic.chain), inj.tampered_block);
  }
}

TEST_F(AdversaryTest, PoisonScalesDeclaredNorm) {
  const Injection inj = inject(AttackKind::kPoisonUpdate, traffic_, 3, {100.0, &sim_->keys()});
  ASSERT_GT(inj.original_norm, 0.0);
  EXPECT_NEAR(inj.poison_norm / inj.original_norm, 100.0, 1e-9);
  EXPECT_EQ(inj.traffic.messages.size(), traffic_.messages.size());
}

TEST_F(AdversaryTest, EavesdropIsPassive) {
  const Injection inj = inject(AttackKind::kEavesdrop, traffic_, 4);
  EXPECT_EQ(inj.adversarial.size(), traffic_.messages.size());  // captured, not altered
  ASSERT_EQ(inj.traffic.messages.size(), traffic_.messages.size());
  for (std::size_t i = 0; i < traffic_.messages.size(); ++i) {
    EXPECT_EQ(inj.traffic.messages[i].wire, traffic_.messages[i].wire);
  }
  EXPECT_EQ(inj.traffic.chain, traffic_.chain);
}

TEST(AttackKinds, NamesRoundTrip) {
  for (AttackKind k : kAllAttackKinds) EXPECT_EQ(attack_kind_from_string(to_string(k)), k);
  EXPECT_FALSE(attack_kind_from_string("side_channel").has_value());
}

TEST(BlockFields, EveryFieldMutationIsDetected) {
  Simulation sim(small_config());
  sim.run_round();
  const Chain& chain = sim.chain();
  for (std::size_t i = 0; i < chain.size(); ++i) {
    for (BlockField f : kAllBlockFields) {
      const std::size_t bits = field_bits(chain[i], f);
      for (std::size_t b = 0; b < bits; b += std::max<std::size_t>(1, bits / 4)) {
        Chain bad = chain;
        mutate_block_field(bad[i], f, b);
        ASSERT_EQ(verify_chain(bad), std::optional<std::size_t>(i))
            << "block " << i << " field " << to_string(f) << " bit " << b;
      }
    }
  }
  LedgerBlock b = chain[1];
  EXPECT_THROW(mutate_block_field(b, BlockField::kRound, 64), std::out_of_range);
}

TEST(LeakDetector, FindsPlaintextCoordinatesAndIgnoresCiphertext) {
  const Vector secret = {0.123456789, -4.5, 0.0};
  WireRecord plain;
  plain.wire = encode_vector(secret);
  EXPECT_TRUE(coordinates_visible(secret, std::vector<WireRecord>{plain}));

  Simulation sim(small_config());
  sim.run_round();
  for (const EdgeUpdate& e : sim.edge_updates()) {
    EXPECT_FALSE(coordinates_visible(e.clipped, sim.trace()));
    EXPECT_FALSE(coordinates_visible(e.masked.payload, sim.trace()));
  }
}

TEST(AttackSuite, EveryKindDetectedOnSmallFleet) {
  const RunConfig c = small_config();
  const std::vector<std::uint64_t> seeds = {7};
  const AttackSuiteResult r = run_attack_suite(c, seeds);
  ASSERT_EQ(r.reports.size(), kAllAttackKinds.size());
  for (const AttackReport& a : r.reports) {
    EXPECT_TRUE(a.passed()) << to_string(a.kind) << ": " << report_to_json(a).dump();
    EXPECT_EQ(a.adversarial_appended, 0u);
    EXPECT_EQ(a.adversarial_opened, 0u);
  }
  ASSERT_EQ(r.probes.size(), 1u);
  EXPECT_EQ(r.probes[0].accepted, r.probes[0].expected_accepted) << r.probes[0].notes;
  EXPECT_TRUE(r.all_passed());
  const auto j = suite_to_json(r);
  EXPECT_TRUE(j.contains("out_of_scope"));
}

}  // namespace
}  // namespace fedledger
