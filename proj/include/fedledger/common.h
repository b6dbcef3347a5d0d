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

#ifndef FEDLEDGER_COMMON_H_
#define FEDLEDGER_COMMON_H_

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace fedledger {

using Vector = std::vector<double>;
using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

// Raised when a runtime invariant fails (non-finite loss, corrupted input).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Identifies an edge node (the party P). Ordered so per-node results reduce
// in a fixed order.
struct NodeId {
  std::uint32_t value = 0;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

// Wire name of a node, e.g. "P3".
std::string party_name(NodeId id);

inline constexpr const char* kAggregatorParty = "C";
inline constexpr const char* kLedgerParty = "B";

// Value-or-error return for outcomes that are expected at runtime (channel
// rejections, ledger rejections) rather than programming errors.
template <typename T, typename E>
class Result {
 public:
  Result(T value) : v_(std::in_place_index<0>, std::move(value)) {}  // NOLINT
  Result(E error) : v_(std::in_place_index<1>, std::move(error)) {}  // NOLINT

  bool ok() const { return v_.index() == 0; }
  explicit operator bool() const { return ok(); }

  T& value() & { return std::get<0>(v_); }
  const T& value() const& { return std::get<0>(v_); }
  T&& value() && { return std::get<0>(std::move(v_)); }
  const E& error() const { return std::get<1>(v_); }

 private:
  std::variant<T, E> v_;
};

}  // namespace fedledger

#endif  // FEDLEDGER_COMMON_H_
