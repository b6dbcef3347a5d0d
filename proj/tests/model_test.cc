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
#include <limits>

#include "fedledger/kernels.h"
#include "fedledger/model.h"
#include "test_util.h"

namespace fedledger {
namespace {

// Central finite difference of the log-loss w.r.t. every parameter, bias
// last. Independent of log_loss_gradient.
Vector fd_gradient(const ModelParams& p, std::span<const Sample> samples, double h) {
  Vector g;
  for (std::size_t j = 0; j <= p.dim(); ++j) {
    ModelParams plus = p, minus = p;
    if (j < p.dim()) {
      plus.weights[j] += h;
      minus.weights[j] -= h;
    } else {
      plus.bias += h;
      minus.bias -= h;
    }
    g.push_back((mean_log_loss(plus, samples) - mean_log_loss(minus, samples)) / (2 * h));
  }
  return g;
}

TEST(Predict, ZeroModelIsOneHalf) {
  EXPECT_EQ(predict(ModelParams::zeros(3), Vector{1, -2, 5}), 0.5);
}

TEST(Predict, LargeMarginSaturates) {
  EXPECT_GT(predict({{10, 0}, 0, 0}, Vector{10, 0}), 0.999);
}

TEST(Predict, HandEvaluatedSigmoid) {
  // 1 / (1 + e^-0.25)
  EXPECT_NEAR(predict({{0.5}, -0.25, 0}, Vector{1.0}), 0.5621765008857981, 1e-15);
}

TEST(Predict, DimensionMismatchThrows) {
  EXPECT_THROW(predict(ModelParams::zeros(2), Vector{1.0}), std::invalid_argument);
}

TEST(LogLoss, StableForLargeMargins) {
  const ModelParams p{{1000.0}, 0, 0};
  EXPECT_NEAR(log_loss(p, {{1.0}, 0}), 1000.0, 1e-9);
  EXPECT_NEAR(log_loss(p, {{1.0}, 1}), 0.0, 1e-300);
  EXPECT_TRUE(std::isfinite(log_loss(p, {{-1.0}, 1})));
}

TEST(Gradient, MatchesCentralFiniteDifferences) {
  Rng rng = make_rng(21);
  std::uniform_int_distribution<int> label(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + rng() % 8;
    ModelParams p{testing::random_vector(rng, d), std::normal_distribution<>(0, 1)(rng), 0};
    const Sample s{testing::random_vector(rng, d), label(rng)};
    const std::vector<Sample> batch = {s};
    const Vector analytic = log_loss_gradient(p, batch);
    const Vector numeric = fd_gradient(p, batch, 1e-5);
    ASSERT_EQ(analytic.size(), d + 1);
    Vector diff = analytic;
    kernels::sub(numeric, diff);
    const double rel = kernels::norm2(diff) / std::max(kernels::norm2(numeric), 1e-8);
    EXPECT_LT(rel, 1e-5) << "trial " << trial;
  }
}

TEST(TrainLocal, VanishingStepGivesVanishingUpdate) {
  const FleetDataset f = generate_fleet(1, 1, 50, 4, 0.0);
  const auto u = train_local(ModelParams::zeros(4), f.partitions[0], {1e-12, 1, 8, 3});
  EXPECT_LT(kernels::norm2(u.grad), 1e-9);
  EXPECT_EQ(u.n_samples, 50u);
  EXPECT_EQ(u.loss_trace.size(), 1u);
}

TEST(TrainLocal, OneFullBatchStepIsMinusLrTimesGradient) {
  const ModelParams p{{0.3, -0.7}, 0.1, 0};
  const std::vector<Sample> one = {{{1.5, 2.0}, 1}};
  const double lr = 0.05;
  const auto u = train_local(p, one, {lr, 1, 1, 0});
  const Vector fd = fd_gradient(p, one, 1e-6);
  ASSERT_EQ(u.grad.size(), 3u);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(u.grad[j], -lr * fd[j], 1e-9);
}

TEST(TrainLocal, SeparablePairLossDecreases) {
  const std::vector<Sample> data = {{{1.0, 1.0}, 1}, {{-1.0, -1.0}, 0}};
  const ModelParams start = ModelParams::zeros(2);
  const auto u = train_local(start, data, {0.01, 100, 2, 4});
  ModelParams end = start;
  apply_delta(end, u.grad);
  EXPECT_LT(mean_log_loss(end, data), mean_log_loss(start, data));
  EXPECT_LT(u.loss_trace.back(), u.loss_trace.front());
}

TEST(TrainLocal, DeterministicForFixedSeed) {
  const FleetDataset f = generate_fleet(2, 1, 80, 5, 0.2);
  const auto a = train_local(ModelParams::zeros(5), f.partitions[0], {0.3, 3, 7, 9});
  const auto b = train_local(ModelParams::zeros(5), f.partitions[0], {0.3, 3, 7, 9});
  EXPECT_EQ(a.grad, b.grad);
  EXPECT_EQ(a.loss_trace, b.loss_trace);
  const auto c = train_local(ModelParams::zeros(5), f.partitions[0], {0.3, 3, 7, 10});
  EXPECT_NE(a.grad, c.grad);
}

TEST(TrainLocal, RejectsBadConfigAndNonFiniteLoss) {
  const std::vector<Sample> data = {{{1.0}, 1}};
  EXPECT_THROW(train_local(ModelParams::zeros(1), data, {0.0, 1, 1, 0}), std::invalid_argument);
  EXPECT_THROW(train_local(ModelParams::zeros(1), std::vector<Sample>{}, {0.1, 1, 1, 0}),
               std::invalid_argument);
  const std::vector<Sample> bad = {{{std::numeric_limits<double>::quiet_NaN()}, 1}};
  EXPECT_THROW(train_local(ModelParams::zeros(1), bad, {0.1, 1, 1, 0}), Error);
}

TEST(Evaluate, PerfectModel) {
  const std::vector<Sample> data = {{{2.0}, 1}, {{-2.0}, 0}, {{3.0}, 1}};
  EXPECT_EQ(evaluate({{5.0}, 0, 0}, data).accuracy, 1.0);
}

TEST(Evaluate, ZeroModelOnBalancedLabels) {
  const std::vector<Sample> data = {{{2.0}, 1}, {{-2.0}, 0}, {{1.0}, 0}, {{7.0}, 1}};
  const Evaluation e = evaluate(ModelParams::zeros(1), data);
  EXPECT_DOUBLE_EQ(e.accuracy, 0.5);
  EXPECT_NEAR(e.mean_loss, std::log(2.0), 1e-15);
}

TEST(Evaluate, ThreeSampleHandComputedLoss) {
  // w=1, b=0; losses ln2, ln(1+e^-2), ln(1+e^1).
  const std::vector<Sample> data = {{{0.0}, 1}, {{2.0}, 1}, {{-1.0}, 1}};
  const Evaluation e = evaluate({{1.0}, 0, 0}, data);
  EXPECT_NEAR(e.mean_loss, (0.6931471805599453 + 0.12692801104297263 + 1.3132616875182228) / 3,
              1e-14);
  EXPECT_NEAR(e.accuracy, 2.0 / 3.0, 1e-15);
}

TEST(Evaluate, FalsePositiveRate) {
  const std::vector<Sample> data = {{{1.0}, 0}, {{-1.0}, 0}, {{-2.0}, 0}, {{3.0}, 1}};
  EXPECT_NEAR(evaluate({{1.0}, 0, 0}, data).false_positive_rate, 1.0 / 3.0, 1e-15);
  EXPECT_THROW(evaluate({{1.0}, 0, 0}, std::vector<Sample>{}), std::invalid_argument);
}

TEST(Evaluate, RangesHoldOnRandomModels) {
  Rng rng = make_rng(8);
  const FleetDataset f = generate_fleet(4, 1, 60, 3, 0.0);
  for (int t = 0; t < 50; ++t) {
    const ModelParams p{testing::random_vector(rng, 3, 5), 0, 0};
    const Evaluation e = evaluate(p, f.partitions[0].samples);
    ASSERT_GE(e.accuracy, 0.0);
    ASSERT_LE(e.accuracy, 1.0);
    ASSERT_GE(e.mean_loss, 0.0);
  }
}

TEST(ModelEncoding, RoundTrip) {
  const ModelParams p{{1.5, -2.25, 0.0}, 0.125, 42};
  const ModelParams q = decode_model(encode_model(p));
  EXPECT_EQ(q.weights, p.weights);
  EXPECT_EQ(q.bias, p.bias);
  EXPECT_EQ(q.version, p.version);
  EXPECT_EQ(flatten(p), (Vector{1.5, -2.25, 0.0, 0.125}));
}

}  // namespace
}  // namespace fedledger
