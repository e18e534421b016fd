/*
 * Copyright 2026 The AuscultaBase Authors.
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

#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference
// implementation; wider variants are selected once at runtime from CPU
// features and may be overridden with AUSCULTA_SIMD=scalar|avx2.
//
// Variants differ only in floating-point reduction order (and FMA
// contraction); results on one machine and one ISA are reproducible.

#include <cstddef>
#include <span>
#include <string_view>

namespace ausculta::simd {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out[k] = re[k]^2 + im[k]^2 over interleaved complex input.
  void (*abs2)(const double* interleaved, double* out, std::size_t n);
  // x *= alpha
  void (*scale_f32)(float alpha, float* x, std::size_t n);
  void (*minmax_f32)(const float* x, std::size_t n, float* lo, float* hi);
};

const KernelTable& ScalarKernels();
// nullptr when the variant was not compiled in or the CPU lacks the feature.
const KernelTable* Avx2Kernels();

const KernelTable& Active();
void SetActive(Isa isa);
std::string_view IsaName(Isa isa);

inline double Dot(std::span<const double> a, std::span<const double> b) {
  return Active().dot(a.data(), b.data(), a.size());
}
inline void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  Active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace ausculta::simd
