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

#ifndef FEDLEDGER_CHANNEL_H_
#define FEDLEDGER_CHANNEL_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include "fedledger/common.h"
#include "fedledger/crypto.h"
#include "fedledger/encoding.h"
#include "fedledger/rng.h"

namespace fedledger {

using Nonce = std::array<std::uint8_t, 16>;

// Freshness of a message: a sender-unique nonce, the simulated-clock tick it
// was sent at, and the training round it belongs to.
struct FreshnessTag {
  Nonce nonce{};
  std::uint64_t timestamp = 0;
  std::uint64_t round = 0;

  friend bool operator==(const FreshnessTag&, const FreshnessTag&) = default;
};

void write_freshness(ByteWriter& w, const FreshnessTag& tag);
FreshnessTag read_freshness(ByteReader& r);

// Pre-shared symmetric keys: K(P-C) per node, K(B-C), K(P-B) per node.
// K(P-B) is registered for completeness; no message flow uses it.
class KeyRegistry {
 public:
  // Deterministic keys for a simulated fleet.
  static KeyRegistry derive(std::uint64_t seed, std::span<const NodeId> nodes);

  const crypto::Key& k_bc() const { return k_bc_; }
  const crypto::Key* k_pc(NodeId node) const;
  const crypto::Key* k_pb(NodeId node) const;

  // Key shared by the two named parties ("P<n>", "C", "B"), order-free.
  const crypto::Key* lookup(std::string_view a, std::string_view b) const;

 private:
  crypto::Key k_bc_{};
  std::map<NodeId, crypto::Key> k_pc_;
  std::map<NodeId, crypto::Key> k_pb_;
};

// Parses "P<n>"; nullopt for anything else.
std::optional<NodeId> parse_party(std::string_view name);

struct Envelope {
  std::string sender;
  std::string receiver;
  FreshnessTag freshness;
  Bytes ciphertext;
  crypto::AeadTag auth_tag{};

  friend bool operator==(const Envelope&, const Envelope&) = default;
};

// Canonical wire layout: sender, receiver (length-prefixed), nonce (16),
// timestamp (u64), round (u64), ciphertext (length-prefixed), tag (16).
Bytes encode_envelope(const Envelope& env);
Envelope decode_envelope(std::span<const std::uint8_t> wire);

// Bytes authenticated alongside the ciphertext: sender, receiver, freshness.
Bytes envelope_associated_data(std::string_view sender,
                               std::string_view receiver,
                               const FreshnessTag& freshness);

// Authenticated encryption of payload bound to (sender, receiver, freshness).
Envelope seal(const crypto::Key& key, std::string sender, std::string receiver,
              const FreshnessTag& freshness,
              std::span<const std::uint8_t> payload);

enum class ChannelError {
  kTampered,    // authentication failed: wrong key or modified bytes
  kReplayed,    // nonce already accepted by this receiver
  kStale,       // timestamp outside the freshness window
  kUnknownKey,  // no registered key for the claimed sender
  kMisrouted,   // envelope addressed to another party
};

std::string_view to_string(ChannelError e);

class ReplayGuard {
 public:
  bool seen(const Nonce& n) const { return seen_.contains(n); }
  void remember(const Nonce& n) { seen_.insert(n); }
  std::size_t size() const { return seen_.size(); }

 private:
  std::set<Nonce> seen_;
};

// Returns the payload iff the tag verifies, the nonce is unseen and
// timestamp <= now <= timestamp + window. Remembers the nonce on success.
Result<Bytes, ChannelError> open(const crypto::Key& key, const Envelope& env,
                                 std::uint64_t window, ReplayGuard& seen,
                                 std::uint64_t now);

class NonceReuseError : public Error {
 public:
  using Error::Error;
};

// Sending side of one party: draws fresh nonces, refuses to seal twice under
// the same nonce or with a timestamp older than its last one.
class Sender {
 public:
  Sender(std::string id, std::uint64_t seed);

  const std::string& id() const { return id_; }

  FreshnessTag fresh_tag(std::uint64_t now, std::uint64_t round);
  Envelope seal(const crypto::Key& key, const std::string& receiver,
                const FreshnessTag& tag, std::span<const std::uint8_t> payload);
  // fresh_tag + seal.
  Envelope send(const crypto::Key& key, const std::string& receiver,
                std::uint64_t now, std::uint64_t round,
                std::span<const std::uint8_t> payload);

 private:
  std::string id_;
  Rng rng_;
  std::set<Nonce> used_;
  std::uint64_t last_timestamp_ = 0;
};

// Receiving side of one party: resolves the key from the registry and keeps
// its own replay guard.
class Receiver {
 public:
  Receiver(std::string id, const KeyRegistry* keys, std::uint64_t window)
      : id_(std::move(id)), keys_(keys), window_(window) {}

  const std::string& id() const { return id_; }
  Result<Bytes, ChannelError> accept(const Envelope& env, std::uint64_t now);
  const ReplayGuard& guard() const { return guard_; }

 private:
  std::string id_;
  const KeyRegistry* keys_;
  std::uint64_t window_;
  ReplayGuard guard_;
};

}  // namespace fedledger

#endif  // FEDLEDGER_CHANNEL_H_
