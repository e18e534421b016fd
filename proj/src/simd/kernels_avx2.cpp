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

#include "ausculta/simd/kernels.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define AUSCULTA_HAVE_AVX2_VARIANT 1
#include <immintrin.h>
#endif

namespace ausculta::simd {

#ifdef AUSCULTA_HAVE_AVX2_VARIANT
namespace {

#define AUSCULTA_AVX2 __attribute__((target("avx2,fma")))

AUSCULTA_AVX2 double DotAvx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  __m256d acc = _mm256_add_pd(acc0, acc1);
  __m128d lo = _mm256_castpd256_pd128(acc);
  __m128d hi = _mm256_extractf128_pd(acc, 1);
  __m128d s = _mm_add_pd(lo, hi);
  s = _mm_add_sd(s, _mm_unpackhi_pd(s, s));
  double total = _mm_cvtsd_f64(s);
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

AUSCULTA_AVX2 void AxpyAvx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

AUSCULTA_AVX2 void Abs2Avx2(const double* z, double* out, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    // [r0 i0 r1 i1] and [r2 i2 r3 i3]
    __m256d p0 = _mm256_loadu_pd(z + 2 * k);
    __m256d p1 = _mm256_loadu_pd(z + 2 * k + 4);
    p0 = _mm256_mul_pd(p0, p0);
    p1 = _mm256_mul_pd(p1, p1);
    // hadd gives [p0_01 p1_01 p0_23 p1_23]; permute into bin order.
    __m256d h = _mm256_hadd_pd(p0, p1);
    _mm256_storeu_pd(out + k, _mm256_permute4x64_pd(h, 0b11011000));
  }
  for (; k < n; ++k) out[k] = z[2 * k] * z[2 * k] + z[2 * k + 1] * z[2 * k + 1];
}

AUSCULTA_AVX2 void ScaleF32Avx2(float alpha, float* x, std::size_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(x + i, _mm256_mul_ps(va, _mm256_loadu_ps(x + i)));
  }
  for (; i < n; ++i) x[i] *= alpha;
}

AUSCULTA_AVX2 void MinMaxF32Avx2(const float* x, std::size_t n, float* lo, float* hi) {
  if (n == 0) return;
  float mn = x[0], mx = x[0];
  std::size_t i = 0;
  if (n >= 8) {
    __m256 vmn = _mm256_loadu_ps(x);
    __m256 vmx = vmn;
    for (i = 8; i + 8 <= n; i += 8) {
      __m256 v = _mm256_loadu_ps(x + i);
      vmn = _mm256_min_ps(vmn, v);
      vmx = _mm256_max_ps(vmx, v);
    }
    alignas(32) float bmn[8], bmx[8];
    _mm256_store_ps(bmn, vmn);
    _mm256_store_ps(bmx, vmx);
    mn = bmn[0];
    mx = bmx[0];
    for (int j = 1; j < 8; ++j) {
      mn = bmn[j] < mn ? bmn[j] : mn;
      mx = bmx[j] > mx ? bmx[j] : mx;
    }
  }
  for (; i < n; ++i) {
    mn = x[i] < mn ? x[i] : mn;
    mx = x[i] > mx ? x[i] : mx;
  }
  *lo = mn;
  *hi = mx;
}

}  // namespace

const KernelTable* Avx2Kernels() {
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  static const KernelTable table{Isa::kAvx2, DotAvx2, AxpyAvx2, Abs2Avx2,
                                 ScaleF32Avx2, MinMaxF32Avx2};
  return supported ? &table : nullptr;
}

#else

const KernelTable* Avx2Kernels() { return nullptr; }

#endif

}  // namespace ausculta::simd
