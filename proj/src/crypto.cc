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

#include "fedledger/crypto.h"

#include <openssl/evp.h>

#include <climits>

namespace fedledger::crypto {
namespace {

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

CipherCtx new_cipher_ctx() {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw Error("EVP_CIPHER_CTX_new failed");
  return ctx;
}

int checked_len(std::size_t n) {
  if (n > static_cast<std::size_t>(INT_MAX)) throw Error("buffer too large");
  return static_cast<int>(n);
}

}  // namespace

struct Sha256::Impl {
  EVP_MD_CTX* ctx = nullptr;
};

Sha256::Sha256() : impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_MD_CTX_new();
  if (impl_->ctx == nullptr ||
      EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 init failed");
  }
}

Sha256::~Sha256() { EVP_MD_CTX_free(impl_->ctx); }

Sha256& Sha256::update(std::span<const std::uint8_t> data) {
  if (EVP_DigestUpdate(impl_->ctx, data.data(), data.size()) != 1) {
    throw Error("SHA-256 update failed");
  }
  return *this;
}

Digest Sha256::finish() {
  Digest out{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(impl_->ctx, out.data(), &len) != 1 ||
      len != out.size()) {
    throw Error("SHA-256 final failed");
  }
  return out;
}

Digest sha256(std::span<const std::uint8_t> data) {
  return Sha256().update(data).finish();
}

Sealed aead_seal(const Key& key, const AeadNonce& nonce,
                 std::span<const std::uint8_t> associated_data,
                 std::span<const std::uint8_t> plaintext) {
  auto ctx = new_cipher_ctx();
  Sealed out;
  out.ciphertext.resize(plaintext.size());
  int len = 0;
  if (EVP_EncryptInit_ex(ctx.get(), EVP_chacha20_poly1305(), nullptr,
                         key.data(), nonce.data()) != 1 ||
      EVP_EncryptUpdate(ctx.get(), nullptr, &len, associated_data.data(),
                        checked_len(associated_data.size())) != 1 ||
      EVP_EncryptUpdate(ctx.get(), out.ciphertext.data(), &len,
                        plaintext.data(),
                        checked_len(plaintext.size())) != 1 ||
      EVP_EncryptFinal_ex(ctx.get(), out.ciphertext.data() + len, &len) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_GET_TAG, kAeadTagSize,
                          out.tag.data()) != 1) {
    throw Error("ChaCha20-Poly1305 seal failed");
  }
  return out;
}

std::optional<Bytes> aead_open(const Key& key, const AeadNonce& nonce,
                               std::span<const std::uint8_t> associated_data,
                               std::span<const std::uint8_t> ciphertext,
                               const AeadTag& tag) {
  auto ctx = new_cipher_ctx();
  Bytes plaintext(ciphertext.size());
  AeadTag tag_copy = tag;
  int len = 0;
  if (EVP_DecryptInit_ex(ctx.get(), EVP_chacha20_poly1305(), nullptr,
                         key.data(), nonce.data()) != 1 ||
      EVP_DecryptUpdate(ctx.get(), nullptr, &len, associated_data.data(),
                        checked_len(associated_data.size())) != 1 ||
      EVP_DecryptUpdate(ctx.get(), plaintext.data(), &len, ciphertext.data(),
                        checked_len(ciphertext.size())) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_AEAD_SET_TAG, kAeadTagSize,
                          tag_copy.data()) != 1) {
    throw Error("ChaCha20-Poly1305 open setup failed");
  }
  if (EVP_DecryptFinal_ex(ctx.get(), plaintext.data() + len, &len) != 1) {
    return std::nullopt;
  }
  return plaintext;
}

}  // namespace fedledger::crypto
