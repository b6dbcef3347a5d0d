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

#include "fedledger/masking.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "fedledger/crypto.h"
#include "fedledger/encoding.h"
#include "fedledger/kernels.h"
#include "fedledger/rng.h"

namespace fedledger {
namespace {

constexpr std::uint64_t kTagPairMask = 0x706d61736b;

}  // namespace

Digest payload_digest(std::span<const double> payload) {
  return crypto::sha256(encode_vector(payload));
}

std::map<NodeId, MaskVector> derive_masks(std::uint64_t round_seed,
                                          std::uint64_t round,
                                          std::span<const NodeId> participants,
                                          std::size_t dim, double strength) {
  if (participants.empty()) {
    throw std::invalid_argument("at least one participant required");
  }
  if (dim == 0) throw std::invalid_argument("mask dim must be >= 1");
  if (!(strength > 0.0) || !std::isfinite(strength)) {
    throw std::invalid_argument("mask strength must be positive and finite");
  }
  std::vector<NodeId> ids(participants.begin(), participants.end());
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw std::invalid_argument("duplicate participant id");
  }

  std::map<NodeId, MaskVector> masks;
  for (NodeId id : ids) masks[id] = MaskVector{id, round, Vector(dim, 0.0)};

  Vector shared(dim);
  for (std::size_t a = 0; a < ids.size(); ++a) {
    for (std::size_t b = a + 1; b < ids.size(); ++b) {
      Rng rng = make_rng(derive_seed(
          round_seed, {kTagPairMask, round, ids[a].value, ids[b].value}));
      std::normal_distribution<double> normal(0.0, strength);
      for (double& v : shared) v = normal(rng);
      kernels::add(shared, masks[ids[a]].values);
      kernels::sub(shared, masks[ids[b]].values);
    }
  }
  return masks;
}

double scaled_mask_strength(double context_strength, double update_norm) {
  return context_strength * std::max(1.0, update_norm);
}

MaskedUpdate apply_mask(const GradientUpdate& update, const MaskVector& mask,
                        const FreshnessTag& freshness) {
  if (update.grad.size() != mask.values.size()) {
    throw std::invalid_argument("mask dimension mismatch");
  }
  MaskedUpdate out;
  out.node_id = mask.node_id;
  out.round = mask.round;
  out.payload = update.grad;
  kernels::add(mask.values, out.payload);
  out.n_samples = update.n_samples;
  out.freshness = freshness;
  out.payload_hash = payload_digest(out.payload);
  return out;
}

Bytes encode_masked_update(const MaskedUpdate& u) {
  ByteWriter w;
  w.u32(u.node_id.value).u64(u.round).bytes(encode_vector(u.payload));
  w.u64(u.n_samples);
  write_freshness(w, u.freshness);
  w.digest(u.payload_hash);
  return std::move(w).take();
}

MaskedUpdate decode_masked_update(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  MaskedUpdate u;
  u.node_id = NodeId{r.u32()};
  u.round = r.u64();
  u.payload = decode_vector(r.bytes());
  u.n_samples = r.u64();
  u.freshness = read_freshness(r);
  u.payload_hash = r.digest();
  if (!r.done()) throw Error("trailing bytes after masked update");
  return u;
}

}  // namespace fedledger
