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

#ifndef FEDLEDGER_CRYPTO_H_
#define FEDLEDGER_CRYPTO_H_

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>

#include "fedledger/common.h"

namespace fedledger::crypto {

inline constexpr std::size_t kKeySize = 32;
inline constexpr std::size_t kAeadNonceSize = 12;
inline constexpr std::size_t kAeadTagSize = 16;

using Key = std::array<std::uint8_t, kKeySize>;
using AeadNonce = std::array<std::uint8_t, kAeadNonceSize>;
using AeadTag = std::array<std::uint8_t, kAeadTagSize>;

// SHA-256.
Digest sha256(std::span<const std::uint8_t> data);

class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::span<const std::uint8_t> data);
  Digest finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct Sealed {
  Bytes ciphertext;
  AeadTag tag{};
};

// ChaCha20-Poly1305 (RFC 8439).
Sealed aead_seal(const Key& key, const AeadNonce& nonce,
                 std::span<const std::uint8_t> associated_data,
                 std::span<const std::uint8_t> plaintext);

// nullopt when the tag does not verify.
std::optional<Bytes> aead_open(const Key& key, const AeadNonce& nonce,
                               std::span<const std::uint8_t> associated_data,
                               std::span<const std::uint8_t> ciphertext,
                               const AeadTag& tag);

}  // namespace fedledger::crypto

#endif  // FEDLEDGER_CRYPTO_H_
