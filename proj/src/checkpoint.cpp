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

#include "ausculta/checkpoint.hpp"

#include <cmath>

#include "ausculta/binary_io.hpp"
#include "ausculta/error.hpp"

namespace ausculta {

std::vector<char> EncodeCheckpoint(const nn::NamedTensors& tensors) {
  io::ByteWriter w;
  w.bytes("ABCP");
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  std::vector<float> payload;
  for (const auto& [name, t] : tensors) {
    if (ShapeSize(t.shape) != t.size()) Fail(Errc::kShapeMismatch, name + ": shape/size mismatch");
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.bytes(name);
    w.u32(static_cast<std::uint32_t>(t.rank()));
    for (int d : t.shape) w.u32(static_cast<std::uint32_t>(d));
    payload.assign(t.data.begin(), t.data.end());
    for (float v : payload) {
      if (!std::isfinite(v)) Fail(Errc::kNonFiniteActivation, name + ": non-finite value");
    }
    w.f32s(payload);
  }
  return w.data();
}

nn::NamedTensors DecodeCheckpoint(std::span<const char> bytes) {
  io::ByteReader r(bytes, "checkpoint");
  if (r.bytes(4) != "ABCP") Fail(Errc::kMalformedContainer, "checkpoint: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    Fail(Errc::kMalformedContainer, "checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  nn::NamedTensors out;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = r.u32();
    if (name_len > r.remaining()) Fail(Errc::kMalformedContainer, "checkpoint: truncated");
    std::string name = r.bytes(name_len);
    const std::uint32_t rank = r.u32();
    if (rank > 8) Fail(Errc::kMalformedContainer, name + ": implausible rank");
    std::vector<int> shape;
    std::size_t n = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      const std::uint32_t d = r.u32();
      if (d > (1u << 30)) Fail(Errc::kMalformedContainer, name + ": implausible dim");
      shape.push_back(static_cast<int>(d));
      n *= d;
    }
    if (n * sizeof(float) > r.remaining()) Fail(Errc::kMalformedContainer, "checkpoint: truncated");
    const std::vector<float> vals = r.f32s(n);
    out.emplace_back(std::move(name), Tensor(std::move(shape), {vals.begin(), vals.end()}));
  }
  if (r.remaining() != 0) Fail(Errc::kMalformedContainer, "checkpoint: trailing bytes");
  return out;
}

void SaveCheckpoint(const std::filesystem::path& path, const nn::NamedTensors& tensors) {
  io::WriteFileAtomic(path, EncodeCheckpoint(tensors));
}

nn::NamedTensors LoadCheckpoint(const std::filesystem::path& path) {
  return DecodeCheckpoint(io::ReadFile(path));
}

nn::NamedTensors SelectPrefix(const nn::NamedTensors& tensors, std::string_view prefix) {
  nn::NamedTensors out;
  for (const auto& entry : tensors) {
    if (entry.first.starts_with(prefix)) out.push_back(entry);
  }
  return out;
}

}  // namespace ausculta
