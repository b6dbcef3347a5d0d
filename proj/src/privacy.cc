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

#include "fedledger/privacy.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "fedledger/kernels.h"
#include "fedledger/rng.h"

namespace fedledger {
namespace {

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must be in [0, 1]");
  }
}

void check_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite update");
  }
}

}  // namespace

void PrivacyBounds::validate() const {
  if (!(epsilon_min > 0.0) || !std::isfinite(epsilon_min)) {
    throw std::invalid_argument("epsilon_min must be positive and finite");
  }
  if (!(epsilon_max >= epsilon_min)) {
    throw std::invalid_argument("epsilon_max must be >= epsilon_min");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must be in (0, 1)");
  }
  if (!(clip_norm > 0.0) || !std::isfinite(clip_norm)) {
    throw std::invalid_argument("clip_norm must be positive and finite");
  }
  if (!(mask_strength_min > 0.0 && mask_strength_max >= mask_strength_min) ||
      !std::isfinite(mask_strength_max)) {
    throw std::invalid_argument("mask strength bounds invalid");
  }
  if (!(stall_relax >= 1.0) || !std::isfinite(stall_relax)) {
    throw std::invalid_argument("stall_relax must be >= 1");
  }
}

bool convergence_stalled(std::span<const double> loss_trace,
                         std::size_t window, double threshold) {
  if (window < 2 || loss_trace.size() < window) return false;
  const double old_loss = loss_trace[loss_trace.size() - window];
  const double new_loss = loss_trace.back();
  if (!(old_loss > 0.0)) return false;
  return (old_loss - new_loss) / old_loss < threshold;
}

PrivacyContext assess_context(double sensitivity, double threat,
                              std::span<const double> loss_trace,
                              const PrivacyBounds& bounds) {
  check_unit(sensitivity, "sensitivity");
  check_unit(threat, "threat");
  bounds.validate();

  PrivacyContext ctx;
  ctx.sensitivity = sensitivity;
  ctx.threat_level = threat;
  ctx.delta = bounds.delta;
  const double strictness = std::max(sensitivity, threat);
  ctx.epsilon = std::isinf(bounds.epsilon_max)
                    ? kInfinity
                    : bounds.epsilon_min + (bounds.epsilon_max - bounds.epsilon_min) *
                                               (1.0 - strictness);
  ctx.mask_strength =
      bounds.mask_strength_min +
      (bounds.mask_strength_max - bounds.mask_strength_min) * threat;
  ctx.clip_norm = bounds.clip_norm;
  if (convergence_stalled(loss_trace, bounds.stall_window,
                          bounds.stall_improvement)) {
    ctx.clip_norm *= bounds.stall_relax;
  }
  return ctx;
}

void clip_to_norm(std::span<double> v, double clip_norm) {
  if (!(clip_norm > 0.0)) throw std::invalid_argument("clip_norm must be > 0");
  check_finite(v);
  const double norm = kernels::norm2(v);
  if (norm > clip_norm) kernels::scale(clip_norm / norm, v);
}

GradientUpdate clip_update(const GradientUpdate& update, double clip_norm) {
  GradientUpdate out = update;
  clip_to_norm(out.grad, clip_norm);
  return out;
}

double gaussian_sigma(double clip_norm, double delta, double epsilon) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must be in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (std::isinf(epsilon)) return 0.0;
  return clip_norm * std::sqrt(2.0 * std::log(1.25 / delta)) / epsilon;
}

void add_gaussian_noise(std::span<double> v, double sigma,
                        std::uint64_t rng_seed) {
  if (sigma == 0.0) return;
  Rng rng = make_rng(rng_seed);
  std::normal_distribution<double> normal(0.0, sigma);
  for (double& x : v) x += normal(rng);
}

GradientUpdate add_dp_noise(const GradientUpdate& update,
                            const PrivacyContext& ctx, std::uint64_t rng_seed) {
  const double sigma = gaussian_sigma(ctx.clip_norm, ctx.delta, ctx.epsilon);
  GradientUpdate out = update;
  add_gaussian_noise(out.grad, sigma, rng_seed);
  return out;
}

BudgetLedger::BudgetLedger(double cap) : cap_(cap) {
  if (!(cap > 0.0)) throw std::invalid_argument("budget cap must be > 0");
}

bool BudgetLedger::can_afford(NodeId node, double epsilon) const {
  return spent(node) + epsilon <= cap_;
}

BudgetLedger::Charge BudgetLedger::charge(NodeId node, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("charged epsilon must be positive and finite");
  }
  if (!can_afford(node, epsilon)) return Charge::kOverBudget;
  spent_[node] += epsilon;
  return Charge::kAccepted;
}

double BudgetLedger::spent(NodeId node) const {
  auto it = spent_.find(node);
  return it == spent_.end() ? 0.0 : it->second;
}

}  // namespace fedledger
