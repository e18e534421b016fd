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

#include "ausculta/run_manifest.hpp"

#include <cstdio>

#include "ausculta/binary_io.hpp"
#include "ausculta/rng.hpp"

namespace ausculta {

nlohmann::ordered_json RunManifest::ToJson() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["seeds"] = seeds;
  j["toolkit_version"] = kToolkitVersion;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["wall_clock_s"] = wall_clock_s;
  return j;
}

std::string ConfigHash(const nlohmann::json& config) {
  // nlohmann::json keeps object keys sorted, so dump() is canonical.
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(Fnv1a64(config.dump())));
  return buf;
}

void WriteRunManifest(const std::filesystem::path& dir, const RunManifest& m) {
  std::filesystem::create_directories(dir);
  const std::string text = m.ToJson().dump(2) + "\n";
  io::WriteFileAtomic(dir / "run_manifest.json", {text.data(), text.size()});
}

}  // namespace ausculta
