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

#ifndef FEDLEDGER_MASKING_H_
#define FEDLEDGER_MASKING_H_

#include <cstdint>
#include <map>
#include <span>

#include "fedledger/channel.h"
#include "fedledger/common.h"
#include "fedledger/model.h"

namespace fedledger {

struct MaskVector {
  NodeId node_id;
  std::uint64_t round = 0;
  Vector values;
};

// What leaves an edge node: the clipped, noised update plus its mask.
struct MaskedUpdate {
  NodeId node_id;
  std::uint64_t round = 0;
  Vector payload;
  std::size_t n_samples = 0;
  FreshnessTag freshness;
  Digest payload_hash{};
};

// SHA-256 over encode_vector(payload).
Digest payload_digest(std::span<const double> payload);

// Pairwise-cancelling masks. Every unordered pair (i, j) shares a Gaussian
// vector s_ij (per-coordinate std `strength`) seeded from
// (round_seed, round, min id, max id); node i adds s_ij for every partner
// with a larger id and subtracts it for every partner with a smaller id, so
// the masks of the full participant set sum to zero. A lone participant gets
// the zero mask. Throws std::invalid_argument on duplicate ids, an empty
// participant list, zero dim or non-positive strength.
std::map<NodeId, MaskVector> derive_masks(std::uint64_t round_seed,
                                          std::uint64_t round,
                                          std::span<const NodeId> participants,
                                          std::size_t dim, double strength);

// Context strength scaled to the update: s * max(1, |update|_2).
double scaled_mask_strength(double context_strength, double update_norm);

// payload = update.grad + mask.values. Throws std::invalid_argument on a
// dimension mismatch.
MaskedUpdate apply_mask(const GradientUpdate& update, const MaskVector& mask,
                        const FreshnessTag& freshness);

Bytes encode_masked_update(const MaskedUpdate& u);
MaskedUpdate decode_masked_update(std::span<const std::uint8_t> bytes);

}  // namespace fedledger

#endif  // FEDLEDGER_MASKING_H_
