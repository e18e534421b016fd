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

// ABCP container: "ABCP", u32 version, u32 tensor count, then per tensor
// u32 name length, UTF-8 name, u32 rank, u32 dims, f32 row-major payload.

#include <filesystem>
#include <span>
#include <vector>

#include "ausculta/model.hpp"

namespace ausculta {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<char> EncodeCheckpoint(const nn::NamedTensors& tensors);
// Throws MalformedContainer on bad magic, version, or truncation.
nn::NamedTensors DecodeCheckpoint(std::span<const char> bytes);

void SaveCheckpoint(const std::filesystem::path& path, const nn::NamedTensors& tensors);
nn::NamedTensors LoadCheckpoint(const std::filesystem::path& path);

// Tensors whose name starts with prefix.
nn::NamedTensors SelectPrefix(const nn::NamedTensors& tensors, std::string_view prefix);

}  // namespace ausculta
