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

#ifndef FEDLEDGER_KERNELS_H_
#define FEDLEDGER_KERNELS_H_

#include <cstddef>
#include <span>
#include <string_view>

namespace fedledger::kernels {

// Dense double-precision vector kernels used on every hot path (logistic
// scores, gradient accumulation, masking, aggregation, fusion).
//
// Each kernel has a scalar reference implementation and SIMD variants
// (AVX2 on x86-64, NEON on AArch64). The variant is chosen once per process
// from CPU features; FEDLEDGER_SIMD=scalar|avx2|neon overrides the choice.
//
// Element-wise kernels (axpy, add, sub, scale, lincomb) are bit-identical
// across variants: they use separate multiply and add, never fused FMA.
// Reductions (dot, sum_squares) reassociate and agree to rounding only.

enum class Isa { kScalar, kAvx2, kNeon };

struct Table {
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*sum_squares)(const double* x, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // y += x
  void (*add)(const double* x, double* y, std::size_t n);
  // y -= x
  void (*sub)(const double* x, double* y, std::size_t n);
  // x *= a
  void (*scale)(double a, double* x, std::size_t n);
  // out = a * x + b * y
  void (*lincomb)(double a, const double* x, double b, const double* y,
                  double* out, std::size_t n);
};

const Table& scalar_table();
// nullptr when the variant is not compiled in or the CPU lacks support.
const Table* avx2_table();
const Table* neon_table();

Isa active_isa();
std::string_view isa_name(Isa isa);
const Table& active();

// Span wrappers over the active table. Sizes must match; checked with
// assert in debug builds.
double dot(std::span<const double> x, std::span<const double> y);
double sum_squares(std::span<const double> x);
double norm2(std::span<const double> x);
void axpy(double a, std::span<const double> x, std::span<double> y);
void add(std::span<const double> x, std::span<double> y);
void sub(std::span<const double> x, std::span<double> y);
void scale(double a, std::span<double> x);
void lincomb(double a, std::span<const double> x, double b,
             std::span<const double> y, std::span<double> out);

}  // namespace fedledger::kernels

#endif  // FEDLEDGER_KERNELS_H_
