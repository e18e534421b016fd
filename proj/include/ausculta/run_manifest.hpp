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

// One run_manifest.json per artifact directory. The numeric outputs of a
// run are a function of (config hash, seed); wall-clock is informational.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace ausculta {

inline constexpr const char* kToolkitVersion = "0.1.0";

struct RunManifest {
  std::string command;
  std::string config_hash;  // FNV-1a of the canonical config dump, hex
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  double wall_clock_s = 0.0;

  nlohmann::ordered_json ToJson() const;
};

std::string ConfigHash(const nlohmann::json& config);
void WriteRunManifest(const std::filesystem::path& dir, const RunManifest& m);

}  // namespace ausculta
