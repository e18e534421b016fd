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

#include <atomic>
#include <cstdlib>
#include <string>

#include "ausculta/error.hpp"
#include "ausculta/simd/kernels.hpp"

namespace ausculta::simd {
namespace {

const KernelTable* Detect() {
  const char* env = std::getenv("AUSCULTA_SIMD");
  std::string want = env ? env : "";
  if (want == "scalar") return &ScalarKernels();
  if (const KernelTable* avx2 = Avx2Kernels()) return avx2;
  return &ScalarKernels();
}

std::atomic<const KernelTable*>& Slot() {
  static std::atomic<const KernelTable*> slot{Detect()};
  return slot;
}

}  // namespace

const KernelTable& Active() { return *Slot().load(std::memory_order_relaxed); }

void SetActive(Isa isa) {
  if (isa == Isa::kScalar) {
    Slot().store(&ScalarKernels());
    return;
  }
  const KernelTable* avx2 = Avx2Kernels();
  if (!avx2) Fail(Errc::kInvalidArgument, "AVX2 kernels unavailable on this CPU");
  Slot().store(avx2);
}

std::string_view IsaName(Isa isa) {
  return isa == Isa::kAvx2 ? "avx2" : "scalar";
}

}  // namespace ausculta::simd
