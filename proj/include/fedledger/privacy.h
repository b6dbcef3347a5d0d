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

#ifndef FEDLEDGER_PRIVACY_H_
#define FEDLEDGER_PRIVACY_H_

#include <cstdint>
#include <limits>
#include <map>
#include <span>

#include "fedledger/common.h"
#include "fedledger/model.h"

namespace fedledger {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Tuning bounds for the per-round privacy context. epsilon_max = +inf turns
// the Gaussian mechanism off (epsilon is then always +inf).
struct PrivacyBounds {
  double epsilon_min = 0.5;
  double epsilon_max = 8.0;
  double delta = 1e-5;
  double clip_norm = 1.0;
  double mask_strength_min = 1.0;
  double mask_strength_max = 10.0;
  // Clip relaxation applied when the loss trace has stalled.
  double stall_relax = 1.5;
  double stall_improvement = 0.01;
  std::size_t stall_window = 5;

  // Throws std::invalid_argument when the bounds are inconsistent.
  void validate() const;
};

struct PrivacyContext {
  double epsilon = kInfinity;
  double delta = 1e-5;
  double clip_norm = 1.0;
  double mask_strength = 1.0;
  double threat_level = 0.0;
  double sensitivity = 0.0;

  bool noise_enabled() const { return epsilon != kInfinity; }
};

// True when the relative loss improvement across the last `window` entries
// of the trace is below `threshold`. Shorter traces never count as stalled.
bool convergence_stalled(std::span<const double> loss_trace,
                         std::size_t window, double threshold);

// epsilon = eps_min + (eps_max - eps_min) * (1 - max(sensitivity, threat))
// mask_strength = s_min + (s_max - s_min) * threat
// clip_norm = bounds.clip_norm, times stall_relax when convergence stalled.
PrivacyContext assess_context(double sensitivity, double threat,
                              std::span<const double> loss_trace,
                              const PrivacyBounds& bounds);

// Scales grad down to L2 norm <= clip_norm; no-op when already inside.
GradientUpdate clip_update(const GradientUpdate& update, double clip_norm);
// In-place variant on a flat vector.
void clip_to_norm(std::span<double> v, double clip_norm);

// Gaussian-mechanism noise scale: clip * sqrt(2 ln(1.25 / delta)) / epsilon.
double gaussian_sigma(double clip_norm, double delta, double epsilon);

// Adds i.i.d. N(0, sigma^2) noise per coordinate (bias included). The
// epsilon = +inf context returns the input unchanged.
GradientUpdate add_dp_noise(const GradientUpdate& update,
                            const PrivacyContext& ctx, std::uint64_t rng_seed);
void add_gaussian_noise(std::span<double> v, double sigma,
                        std::uint64_t rng_seed);

// Per-node epsilon spent under basic (linear) composition.
class BudgetLedger {
 public:
  enum class Charge { kAccepted, kOverBudget };

  explicit BudgetLedger(double cap);

  // Adds epsilon to the node's total unless that would exceed the cap, in
  // which case the ledger is left unchanged. Throws std::invalid_argument for
  // non-finite or non-positive epsilon.
  Charge charge(NodeId node, double epsilon);
  bool can_afford(NodeId node, double epsilon) const;

  double spent(NodeId node) const;
  double remaining(NodeId node) const { return cap_ - spent(node); }
  double cap() const { return cap_; }
  const std::map<NodeId, double>& all() const { return spent_; }

 private:
  double cap_;
  std::map<NodeId, double> spent_;
};

}  // namespace fedledger

#endif  // FEDLEDGER_PRIVACY_H_
