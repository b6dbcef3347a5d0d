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

#ifndef FEDLEDGER_ENCODING_H_
#define FEDLEDGER_ENCODING_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "fedledger/common.h"

namespace fedledger {

// Canonical byte serialization shared by envelopes, payload hashing and
// ledger blocks: fixed field order, big-endian integers, IEEE-754 doubles as
// their big-endian bit pattern, variable-length fields prefixed with a u32
// length.
class ByteWriter {
 public:
  ByteWriter& u8(std::uint8_t v);
  ByteWriter& u32(std::uint32_t v);
  ByteWriter& u64(std::uint64_t v);
  ByteWriter& f64(double v);
  ByteWriter& raw(std::span<const std::uint8_t> bytes);
  ByteWriter& bytes(std::span<const std::uint8_t> bytes);  // length-prefixed
  ByteWriter& str(std::string_view s);                     // length-prefixed
  ByteWriter& digest(const Digest& d) { return raw(d); }

  const Bytes& data() const& { return buf_; }
  Bytes take() && { return std::move(buf_); }

 private:
  Bytes buf_;
};

// Reads what ByteWriter wrote. Throws Error on truncated input.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  Bytes raw(std::size_t n);
  Bytes bytes();
  std::string str();
  Digest digest();

  bool done() const { return pos_ == in_.size(); }

 private:
  std::span<const std::uint8_t> take(std::size_t n);

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

// Length-prefixed sequence of big-endian doubles.
Bytes encode_vector(std::span<const double> v);
Vector decode_vector(std::span<const std::uint8_t> bytes);

std::string to_hex(std::span<const std::uint8_t> bytes);
// Throws Error on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);
Digest digest_from_hex(std::string_view hex);

}  // namespace fedledger

#endif  // FEDLEDGER_ENCODING_H_
