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

#include <cmath>
#include <vector>

#include "fedledger/kernels.h"
#include "fedledger/privacy.h"
#include "test_util.h"

namespace fedledger {
namespace {

GradientUpdate update_of(Vector g) { return {std::move(g), 10, {}}; }

TEST(AssessContext, MidSensitivityNoThreat) {
  const PrivacyContext c = assess_context(0.5, 0.0, {}, PrivacyBounds{});
  EXPECT_DOUBLE_EQ(c.epsilon, 4.25);
  EXPECT_DOUBLE_EQ(c.mask_strength, 1.0);
  EXPECT_DOUBLE_EQ(c.clip_norm, 1.0);
  EXPECT_TRUE(c.noise_enabled());
}

TEST(AssessContext, ExtremesAndThreat) {
  const PrivacyBounds b;
  EXPECT_DOUBLE_EQ(assess_context(0.0, 0.0, {}, b).epsilon, 8.0);
  EXPECT_DOUBLE_EQ(assess_context(1.0, 0.0, {}, b).epsilon, 0.5);
  EXPECT_DOUBLE_EQ(assess_context(0.2, 0.8, {}, b).epsilon, 0.5 + 7.5 * 0.2);
  EXPECT_DOUBLE_EQ(assess_context(0.0, 1.0, {}, b).mask_strength, 10.0);
  EXPECT_DOUBLE_EQ(assess_context(0.0, 0.5, {}, b).mask_strength, 5.5);
}

TEST(AssessContext, InfiniteCeilingDisablesNoise) {
  PrivacyBounds b;
  b.epsilon_max = kInfinity;
  const PrivacyContext c = assess_context(0.9, 0.9, {}, b);
  EXPECT_EQ(c.epsilon, kInfinity);
  EXPECT_FALSE(c.noise_enabled());
}

TEST(AssessContext, StrictnessIsMonotone) {
  const PrivacyBounds b;
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const double s = i / 20.0, t = j / 20.0;
      const PrivacyContext c = assess_context(s, t, {}, b);
      ASSERT_GE(c.epsilon, b.epsilon_min);
      ASSERT_LE(c.epsilon, b.epsilon_max);
      if (i > 0) {
        ASSERT_LE(c.epsilon, assess_context((i - 1) / 20.0, t, {}, b).epsilon);
      }
      if (j > 0) {
        ASSERT_LE(c.epsilon, assess_context(s, (j - 1) / 20.0, {}, b).epsilon);
        ASSERT_GE(c.mask_strength, assess_context(s, (j - 1) / 20.0, {}, b).mask_strength);
      }
    }
  }
}

TEST(AssessContext, StalledConvergenceRelaxesClip) {
  const PrivacyBounds b;
  const std::vector<double> flat = {0.5, 0.5, 0.5, 0.5, 0.5};
  const std::vector<double> falling = {0.9, 0.7, 0.5, 0.4, 0.3};
  EXPECT_DOUBLE_EQ(assess_context(0, 0, flat, b).clip_norm, 1.5);
  EXPECT_DOUBLE_EQ(assess_context(0, 0, falling, b).clip_norm, 1.0);
  EXPECT_DOUBLE_EQ(assess_context(0, 0, std::vector<double>{0.5, 0.5}, b).clip_norm, 1.0);
}

TEST(AssessContext, RejectsOutOfRangeInputs) {
  EXPECT_THROW(assess_context(1.1, 0, {}, PrivacyBounds{}), std::invalid_argument);
  EXPECT_THROW(assess_context(0, -0.1, {}, PrivacyBounds{}), std::invalid_argument);
  PrivacyBounds b;
  b.epsilon_min = 9.0;
  EXPECT_THROW(assess_context(0, 0, {}, b), std::invalid_argument);
}

TEST(Clip, Examples) {
  EXPECT_EQ(clip_update(update_of({3, 4, 0}), 5.0).grad, (Vector{3, 4, 0}));
  const Vector c = clip_update(update_of({6, 8, 0}), 5.0).grad;
  EXPECT_NEAR(c[0], 3.0, 1e-15);
  EXPECT_NEAR(c[1], 4.0, 1e-15);
  EXPECT_EQ(c[2], 0.0);
  EXPECT_EQ(clip_update(update_of({0, 0, 0}), 1.0).grad, (Vector{0, 0, 0}));
  EXPECT_EQ(clip_update(update_of({6, 8}), 5.0).n_samples, 10u);
}

TEST(Clip, NormNeverExceedsBound) {
  Rng rng = make_rng(3);
  std::uniform_real_distribution<double> cdist(0.01, 10.0);
  for (int t = 0; t < 1000; ++t) {
    Vector v = testing::random_vector(rng, 1 + rng() % 20, 10.0);
    const Vector before = v;
    const double c = cdist(rng);
    clip_to_norm(v, c);
    ASSERT_LE(kernels::norm2(v), c + 1e-12);
    if (kernels::norm2(before) <= c) {
      ASSERT_EQ(v, before);
    }
  }
}

TEST(GaussianSigma, MatchesClosedForm) {
  // sqrt(2 ln(1.25 / 1e-5)), computed independently.
  EXPECT_NEAR(gaussian_sigma(1.0, 1e-5, 1.0), 4.844805262605389, 1e-12);
  EXPECT_NEAR(gaussian_sigma(2.0, 1e-5, 4.0), 4.844805262605389 / 2, 1e-12);
  EXPECT_THROW(gaussian_sigma(1.0, 1e-5, 0.0), std::invalid_argument);
}

TEST(DpNoise, EmpiricalMomentsMatchSigma) {
  PrivacyContext ctx;
  ctx.epsilon = 1.0;
  ctx.delta = 1e-5;
  ctx.clip_norm = 1.0;
  const std::size_t n = 100000;
  const GradientUpdate noisy = add_dp_noise(update_of(Vector(n - 1, 0.0)), ctx, 99);
  ASSERT_EQ(noisy.grad.size(), n - 1);
  double sum = 0, sq = 0;
  for (double x : noisy.grad) {
    sum += x;
    sq += x * x;
  }
  const double m = static_cast<double>(noisy.grad.size());
  const double mean = sum / m;
  const double sd = std::sqrt(sq / m - mean * mean);
  const double sigma = 4.844805262605389;
  EXPECT_NEAR(sd, sigma, 0.02 * sigma);
  EXPECT_LT(std::abs(mean), 3 * sigma / std::sqrt(m));
}

TEST(DpNoise, InfiniteEpsilonIsBitIdentical) {
  PrivacyContext ctx;  // epsilon = +inf
  const GradientUpdate u = update_of({0.1, -2.5, 3e-300, 7});
  EXPECT_EQ(add_dp_noise(u, ctx, 1).grad, u.grad);
}

TEST(DpNoise, DeterministicPerSeed) {
  PrivacyContext ctx;
  ctx.epsilon = 2.0;
  const GradientUpdate u = update_of(Vector(16, 1.0));
  EXPECT_EQ(add_dp_noise(u, ctx, 5).grad, add_dp_noise(u, ctx, 5).grad);
  EXPECT_NE(add_dp_noise(u, ctx, 5).grad, add_dp_noise(u, ctx, 6).grad);
}

TEST(Budget, SingleChargeIsRecorded) {
  BudgetLedger b(20.0);
  EXPECT_EQ(b.charge({1}, 4.25), BudgetLedger::Charge::kAccepted);
  EXPECT_DOUBLE_EQ(b.spent({1}), 4.25);
  EXPECT_DOUBLE_EQ(b.remaining({1}), 15.75);
  EXPECT_DOUBLE_EQ(b.spent({2}), 0.0);
}

TEST(Budget, ChargeOverCapIsRejectedAndLeavesLedgerUnchanged) {
  BudgetLedger b(10.0);
  ASSERT_EQ(b.charge({1}, 9.0), BudgetLedger::Charge::kAccepted);
  EXPECT_EQ(b.charge({1}, 4.25), BudgetLedger::Charge::kOverBudget);
  EXPECT_DOUBLE_EQ(b.spent({1}), 9.0);
}

TEST(Budget, ThreeChargesOfThreeFitTheFourthDoesNot) {
  BudgetLedger b(10.0);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(b.charge({4}, 3.0), BudgetLedger::Charge::kAccepted);
  EXPECT_EQ(b.charge({4}, 3.0), BudgetLedger::Charge::kOverBudget);
  EXPECT_DOUBLE_EQ(b.spent({4}), 9.0);
}

TEST(Budget, RejectsInvalidEpsilon) {
  BudgetLedger b(10.0);
  EXPECT_THROW(b.charge({1}, 0.0), std::invalid_argument);
  EXPECT_THROW(b.charge({1}, kInfinity), std::invalid_argument);
  EXPECT_THROW(b.charge({1}, std::nan("")), std::invalid_argument);
}

TEST(Budget, SpentNeverExceedsCapUnderRandomCharges) {
  Rng rng = make_rng(17);
  std::uniform_real_distribution<double> eps(0.1, 5.0);
  BudgetLedger b(20.0);
  for (int t = 0; t < 5000; ++t) {
    const NodeId n{static_cast<std::uint32_t>(rng() % 6)};
    const double before = b.spent(n);
    const double e = eps(rng);
    const auto r = b.charge(n, e);
    ASSERT_LE(b.spent(n), 20.0 + 1e-12);
    if (r == BudgetLedger::Charge::kAccepted) {
      ASSERT_DOUBLE_EQ(b.spent(n), before + e);
    } else {
      ASSERT_GT(before + e, 20.0);
      ASSERT_EQ(b.spent(n), before);
    }
  }
}

}  // namespace
}  // namespace fedledger
