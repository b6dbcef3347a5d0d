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

#include <cassert>
#include <cmath>
#include <cstdlib>
#include <string>

#include "fedledger/kernels.h"

namespace fedledger::kernels {
namespace {

struct Selection {
  Isa isa;
  const Table* table;
};

Selection select() {
  const char* forced = std::getenv("FEDLEDGER_SIMD");
  const std::string want = forced != nullptr ? forced : "";
  if (want == "scalar") return {Isa::kScalar, &scalar_table()};
  if ((want.empty() || want == "avx2") && avx2_table() != nullptr) {
    return {Isa::kAvx2, avx2_table()};
  }
  if ((want.empty() || want == "neon") && neon_table() != nullptr) {
    return {Isa::kNeon, neon_table()};
  }
  return {Isa::kScalar, &scalar_table()};
}

const Selection& selection() {
  static const Selection s = select();
  return s;
}

}  // namespace

Isa active_isa() { return selection().isa; }

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

const Table& active() { return *selection().table; }

double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  return active().dot(x.data(), y.data(), x.size());
}

double sum_squares(std::span<const double> x) {
  return active().sum_squares(x.data(), x.size());
}

double norm2(std::span<const double> x) { return std::sqrt(sum_squares(x)); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(a, x.data(), y.data(), x.size());
}

void add(std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().add(x.data(), y.data(), x.size());
}

void sub(std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().sub(x.data(), y.data(), x.size());
}

void scale(double a, std::span<double> x) {
  active().scale(a, x.data(), x.size());
}

void lincomb(double a, std::span<const double> x, double b,
             std::span<const double> y, std::span<double> out) {
  assert(x.size() == y.size() && x.size() == out.size());
  active().lincomb(a, x.data(), b, y.data(), out.data(), x.size());
}

}  // namespace fedledger::kernels
