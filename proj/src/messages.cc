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

#include "fedledger/messages.h"

#include <utility>

#include "fedledger/encoding.h"

namespace fedledger {

Bytes encode_update_message(const UpdateMessage& m) {
  ByteWriter w;
  w.bytes(encode_masked_update(m.masked)).f64(m.epsilon).f64(m.update_norm);
  return std::move(w).take();
}

UpdateMessage decode_update_message(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  UpdateMessage m;
  const Bytes inner = r.bytes();
  m.masked = decode_masked_update(inner);
  m.epsilon = r.f64();
  m.update_norm = r.f64();
  if (!r.done()) throw Error("trailing bytes in update message");
  return m;
}

Bytes encode_submission(const Submission& s) {
  ByteWriter w;
  w.bytes(canonical_meta(s.meta)).digest(s.payload_hash).bytes(s.payload);
  return std::move(w).take();
}

Submission decode_submission(std::span<const std::uint8_t> bytes) {
  ByteReader outer(bytes);
  const Bytes meta_bytes = outer.bytes();
  Submission s;
  s.payload_hash = outer.digest();
  s.payload = outer.bytes();
  if (!outer.done()) throw Error("trailing bytes in submission");

  ByteReader r(meta_bytes);
  const std::uint8_t kind = r.u8();
  if (kind > static_cast<std::uint8_t>(BlockKind::kFeedback)) {
    throw Error("unknown block kind in submission");
  }
  s.meta.kind = static_cast<BlockKind>(kind);
  s.meta.origin = r.str();
  s.meta.round = r.u64();
  s.meta.model_version = r.u64();
  s.meta.freshness = read_freshness(r);
  s.meta.epsilon_charged = r.f64();
  s.meta.n_samples = r.u64();
  s.meta.update_norm = r.f64();
  s.meta.recorded_at = r.u64();
  if (!r.done()) throw Error("trailing bytes in submission metadata");
  return s;
}

Bytes encode_feedback(const FeedbackMessage& m) {
  ByteWriter w;
  w.bytes(encode_model(m.model)).f64(m.quality.accuracy_gain);
  w.f64(m.quality.explanation_stability).u64(m.n_samples);
  return std::move(w).take();
}

FeedbackMessage decode_feedback(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  FeedbackMessage m;
  const Bytes inner = r.bytes();
  m.model = decode_model(inner);
  m.quality.accuracy_gain = r.f64();
  m.quality.explanation_stability = r.f64();
  m.n_samples = r.u64();
  if (!r.done()) throw Error("trailing bytes in feedback message");
  return m;
}

}  // namespace fedledger
