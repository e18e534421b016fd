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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ausculta/simd/kernels.hpp"

using namespace ausculta::simd;

namespace {

class SimdEquivalence : public ::testing::TestWithParam<std::size_t> {
 protected:
  void SetUp() override {
    avx2_ = Avx2Kernels();
    if (!avx2_) GTEST_SKIP() << "AVX2 variant unavailable on this CPU";
  }
  const KernelTable& scalar_ = ScalarKernels();
  const KernelTable* avx2_ = nullptr;
};

std::vector<double> RandomVec(std::size_t n, unsigned seed) {
  std::mt19937 g(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(g);
  return v;
}

}  // namespace

TEST_P(SimdEquivalence, DotMatchesScalar) {
  const std::size_t n = GetParam();
  auto a = RandomVec(n, 1), b = RandomVec(n, 2);
  const double ref = scalar_.dot(a.data(), b.data(), n);
  EXPECT_NEAR(avx2_->dot(a.data(), b.data(), n), ref, 1e-12 * (1.0 + std::abs(ref)) * n);
}

TEST_P(SimdEquivalence, AxpyMatchesScalar) {
  const std::size_t n = GetParam();
  auto x = RandomVec(n, 3), y1 = RandomVec(n, 4);
  auto y2 = y1;
  scalar_.axpy(0.37, x.data(), y1.data(), n);
  avx2_->axpy(0.37, x.data(), y2.data(), n);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-14) << i;
}

TEST_P(SimdEquivalence, Abs2MatchesScalar) {
  const std::size_t n = GetParam();
  auto z = RandomVec(2 * n, 5);
  std::vector<double> o1(n), o2(n);
  scalar_.abs2(z.data(), o1.data(), n);
  avx2_->abs2(z.data(), o2.data(), n);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(o1[i], o2[i], 1e-13) << i;
}

TEST_P(SimdEquivalence, ScaleAndMinMaxMatchScalar) {
  const std::size_t n = GetParam();
  auto d = RandomVec(n, 6);
  std::vector<float> f1(d.begin(), d.end());
  auto f2 = f1;
  scalar_.scale_f32(1.05f, f1.data(), n);
  avx2_->scale_f32(1.05f, f2.data(), n);
  EXPECT_EQ(f1, f2);
  if (n == 0) return;
  float lo1, hi1, lo2, hi2;
  scalar_.minmax_f32(f1.data(), n, &lo1, &hi1);
  avx2_->minmax_f32(f1.data(), n, &lo2, &hi2);
  EXPECT_EQ(lo1, lo2);
  EXPECT_EQ(hi1, hi2);
}

INSTANTIATE_TEST_SUITE_P(Lengths, SimdEquivalence,
                         ::testing::Values(0, 1, 3, 4, 7, 8, 9, 16, 31, 64, 513, 1000));

TEST(SimdDispatch, SetActiveSwitchesTable) {
  SetActive(Isa::kScalar);
  EXPECT_EQ(Active().isa, Isa::kScalar);
  if (Avx2Kernels()) {
    SetActive(Isa::kAvx2);
    EXPECT_EQ(Active().isa, Isa::kAvx2);
  }
  EXPECT_EQ(IsaName(Isa::kScalar), "scalar");
}

TEST(SimdScalar, DotHandArithmetic) {
  const double a[] = {1, 2, 3}, b[] = {4, 5, 6};
  EXPECT_DOUBLE_EQ(ScalarKernels().dot(a, b, 3), 32.0);
}
