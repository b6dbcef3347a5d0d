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

#include "fedledger/encoding.h"

#include <bit>
#include <limits>

namespace fedledger {

std::string party_name(NodeId id) { return "P" + std::to_string(id.value); }

ByteWriter& ByteWriter::u8(std::uint8_t v) {
  buf_.push_back(v);
  return *this;
}

ByteWriter& ByteWriter::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    buf_.push_back(static_cast<std::uint8_t>(v >> shift));
  }
  return *this;
}

ByteWriter& ByteWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    buf_.push_back(static_cast<std::uint8_t>(v >> shift));
  }
  return *this;
}

ByteWriter& ByteWriter::f64(double v) {
  return u64(std::bit_cast<std::uint64_t>(v));
}

ByteWriter& ByteWriter::raw(std::span<const std::uint8_t> bytes) {
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
  return *this;
}

ByteWriter& ByteWriter::bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error("field too large for u32 length prefix");
  }
  u32(static_cast<std::uint32_t>(bytes.size()));
  return raw(bytes);
}

ByteWriter& ByteWriter::str(std::string_view s) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(s.data());
  return bytes({p, s.size()});
}

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
  if (in_.size() - pos_ < n) throw Error("truncated canonical encoding");
  auto out = in_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }

std::uint32_t ByteReader::u32() {
  std::uint32_t v = 0;
  for (std::uint8_t b : take(4)) v = (v << 8) | b;
  return v;
}

std::uint64_t ByteReader::u64() {
  std::uint64_t v = 0;
  for (std::uint8_t b : take(8)) v = (v << 8) | b;
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

Bytes ByteReader::raw(std::size_t n) {
  auto s = take(n);
  return {s.begin(), s.end()};
}

Bytes ByteReader::bytes() { return raw(u32()); }

std::string ByteReader::str() {
  auto s = take(u32());
  return {s.begin(), s.end()};
}

Digest ByteReader::digest() {
  Digest d{};
  auto s = take(d.size());
  std::copy(s.begin(), s.end(), d.begin());
  return d;
}

Bytes encode_vector(std::span<const double> v) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (double x : v) w.f64(x);
  return std::move(w).take();
}

Vector decode_vector(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  Vector v(r.u32());
  for (double& x : v) x = r.f64();
  if (!r.done()) throw Error("trailing bytes after vector");
  return v;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error("odd-length hex string");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error("invalid hex character");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

Digest digest_from_hex(std::string_view hex) {
  Bytes b = from_hex(hex);
  Digest d{};
  if (b.size() != d.size()) throw Error("digest must be 32 bytes");
  std::copy(b.begin(), b.end(), d.begin());
  return d;
}

}  // namespace fedledger
