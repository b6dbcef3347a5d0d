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

#ifndef FEDLEDGER_MESSAGES_H_
#define FEDLEDGER_MESSAGES_H_

#include <cstdint>
#include <span>

#include "fedledger/common.h"
#include "fedledger/ledger.h"
#include "fedledger/masking.h"
#include "fedledger/model.h"
#include "fedledger/xai.h"

// Plaintexts carried inside sealed envelopes. Decoders throw Error on
// malformed or trailing bytes.
namespace fedledger {

// P -> C: masked update plus the privacy metadata the ledger checks.
struct UpdateMessage {
  MaskedUpdate masked;
  double epsilon = 0.0;      // 0 when noise is off
  double update_norm = 0.0;  // clipped, pre-noise norm
};

Bytes encode_update_message(const UpdateMessage& m);
UpdateMessage decode_update_message(std::span<const std::uint8_t> bytes);

// C -> B: a record for the ledger.
struct Submission {
  BlockMeta meta;
  Digest payload_hash{};
  Bytes payload;
};

Bytes encode_submission(const Submission& s);
Submission decode_submission(std::span<const std::uint8_t> bytes);

// P -> C after feedback: the integrated model (node site) or the corrected
// local model (cloud site), with its quality and the node's sample count.
struct FeedbackMessage {
  ModelParams model;
  FeedbackQuality quality;
  std::uint64_t n_samples = 0;
};

Bytes encode_feedback(const FeedbackMessage& m);
FeedbackMessage decode_feedback(std::span<const std::uint8_t> bytes);

}  // namespace fedledger

#endif  // FEDLEDGER_MESSAGES_H_
