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

#include "fedledger/channel.h"

#include <charconv>

namespace fedledger {
namespace {

constexpr std::uint64_t kTagKeyPc = 0x6b5f7063;
constexpr std::uint64_t kTagKeyPb = 0x6b5f7062;
constexpr std::uint64_t kTagKeyBc = 0x6b5f6263;

crypto::Key derive_key(std::uint64_t seed, std::uint64_t tag,
                       std::uint64_t node) {
  ByteWriter w;
  w.str("fedledger-key").u64(seed).u64(tag).u64(node);
  return crypto::sha256(w.data());
}

crypto::AeadNonce aead_nonce(const Nonce& n) {
  const Digest d = crypto::sha256(n);
  crypto::AeadNonce out{};
  std::copy_n(d.begin(), out.size(), out.begin());
  return out;
}

}  // namespace

void write_freshness(ByteWriter& w, const FreshnessTag& tag) {
  w.raw(tag.nonce).u64(tag.timestamp).u64(tag.round);
}

FreshnessTag read_freshness(ByteReader& r) {
  FreshnessTag tag;
  Bytes n = r.raw(tag.nonce.size());
  std::copy(n.begin(), n.end(), tag.nonce.begin());
  tag.timestamp = r.u64();
  tag.round = r.u64();
  return tag;
}

KeyRegistry KeyRegistry::derive(std::uint64_t seed,
                                std::span<const NodeId> nodes) {
  KeyRegistry reg;
  reg.k_bc_ = derive_key(seed, kTagKeyBc, 0);
  for (NodeId n : nodes) {
    reg.k_pc_[n] = derive_key(seed, kTagKeyPc, n.value);
    reg.k_pb_[n] = derive_key(seed, kTagKeyPb, n.value);
  }
  return reg;
}

const crypto::Key* KeyRegistry::k_pc(NodeId node) const {
  auto it = k_pc_.find(node);
  return it == k_pc_.end() ? nullptr : &it->second;
}

const crypto::Key* KeyRegistry::k_pb(NodeId node) const {
  auto it = k_pb_.find(node);
  return it == k_pb_.end() ? nullptr : &it->second;
}

std::optional<NodeId> parse_party(std::string_view name) {
  if (name.size() < 2 || name[0] != 'P') return std::nullopt;
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), v);
  if (ec != std::errc() || ptr != name.data() + name.size()) return std::nullopt;
  if (party_name(NodeId{v}) != name) return std::nullopt;  // no leading zeros
  return NodeId{v};
}

const crypto::Key* KeyRegistry::lookup(std::string_view a,
                                       std::string_view b) const {
  if (a > b) std::swap(a, b);
  // Sorted: "B" < "C" < "P..."
  if (a == kLedgerParty && b == kAggregatorParty) return &k_bc_;
  if (auto node = parse_party(b)) {
    if (a == kAggregatorParty) return k_pc(*node);
    if (a == kLedgerParty) return k_pb(*node);
  }
  return nullptr;
}

Bytes encode_envelope(const Envelope& env) {
  ByteWriter w;
  w.str(env.sender).str(env.receiver);
  write_freshness(w, env.freshness);
  w.bytes(env.ciphertext).raw(env.auth_tag);
  return std::move(w).take();
}

Envelope decode_envelope(std::span<const std::uint8_t> wire) {
  ByteReader r(wire);
  Envelope env;
  env.sender = r.str();
  env.receiver = r.str();
  env.freshness = read_freshness(r);
  env.ciphertext = r.bytes();
  Bytes tag = r.raw(env.auth_tag.size());
  std::copy(tag.begin(), tag.end(), env.auth_tag.begin());
  if (!r.done()) throw Error("trailing bytes after envelope");
  return env;
}

Bytes envelope_associated_data(std::string_view sender,
                               std::string_view receiver,
                               const FreshnessTag& freshness) {
  ByteWriter w;
  w.str("fedledger-envelope-v1").str(sender).str(receiver);
  write_freshness(w, freshness);
  return std::move(w).take();
}

Envelope seal(const crypto::Key& key, std::string sender, std::string receiver,
              const FreshnessTag& freshness,
              std::span<const std::uint8_t> payload) {
  const Bytes ad = envelope_associated_data(sender, receiver, freshness);
  crypto::Sealed sealed =
      crypto::aead_seal(key, aead_nonce(freshness.nonce), ad, payload);
  return Envelope{std::move(sender), std::move(receiver), freshness,
                  std::move(sealed.ciphertext), sealed.tag};
}

std::string_view to_string(ChannelError e) {
  switch (e) {
    case ChannelError::kTampered: return "tampered";
    case ChannelError::kReplayed: return "replayed";
    case ChannelError::kStale: return "stale";
    case ChannelError::kUnknownKey: return "unknown_key";
    case ChannelError::kMisrouted: return "misrouted";
  }
  return "unknown";
}

Result<Bytes, ChannelError> open(const crypto::Key& key, const Envelope& env,
                                 std::uint64_t window, ReplayGuard& seen,
                                 std::uint64_t now) {
  const Bytes ad =
      envelope_associated_data(env.sender, env.receiver, env.freshness);
  std::optional<Bytes> plain = crypto::aead_open(
      key, aead_nonce(env.freshness.nonce), ad, env.ciphertext, env.auth_tag);
  if (!plain) return ChannelError::kTampered;
  if (seen.seen(env.freshness.nonce)) return ChannelError::kReplayed;
  if (env.freshness.timestamp > now || now - env.freshness.timestamp > window) {
    return ChannelError::kStale;
  }
  seen.remember(env.freshness.nonce);
  return std::move(*plain);
}

Sender::Sender(std::string id, std::uint64_t seed)
    : id_(std::move(id)), rng_(make_rng(seed)) {}

FreshnessTag Sender::fresh_tag(std::uint64_t now, std::uint64_t round) {
  FreshnessTag tag;
  tag.timestamp = now;
  tag.round = round;
  do {
    for (std::size_t i = 0; i < tag.nonce.size(); i += 8) {
      std::uint64_t r = rng_();
      for (std::size_t b = 0; b < 8; ++b) {
        tag.nonce[i + b] = static_cast<std::uint8_t>(r >> (8 * b));
      }
    }
  } while (used_.contains(tag.nonce));
  return tag;
}

Envelope Sender::seal(const crypto::Key& key, const std::string& receiver,
                      const FreshnessTag& tag,
                      std::span<const std::uint8_t> payload) {
  if (used_.contains(tag.nonce)) {
    throw NonceReuseError(id_ + " attempted to reuse a nonce");
  }
  if (tag.timestamp < last_timestamp_) {
    throw Error(id_ + " timestamp went backwards");
  }
  used_.insert(tag.nonce);
  last_timestamp_ = tag.timestamp;
  return fedledger::seal(key, id_, receiver, tag, payload);
}

Envelope Sender::send(const crypto::Key& key, const std::string& receiver,
                      std::uint64_t now, std::uint64_t round,
                      std::span<const std::uint8_t> payload) {
  return seal(key, receiver, fresh_tag(now, round), payload);
}

Result<Bytes, ChannelError> Receiver::accept(const Envelope& env,
                                             std::uint64_t now) {
  if (env.receiver != id_) return ChannelError::kMisrouted;
  const crypto::Key* key = keys_->lookup(env.sender, id_);
  if (key == nullptr) return ChannelError::kUnknownKey;
  return open(*key, env, window_, guard_, now);
}

}  // namespace fedledger
