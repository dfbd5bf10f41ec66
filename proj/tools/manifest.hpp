// Copyright 2026 The DLSC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DLSC_TOOLS_MANIFEST_HPP
#define DLSC_TOOLS_MANIFEST_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

namespace dlsc::tools {

/// FNV-1a 64-bit hash of a file's bytes, as "fnv1a64:<hex>". Strong enough
/// to detect any accidental output difference between runs.
std::string file_checksum(const std::filesystem::path& path);

/// Collects the resolved configuration and the checksums of every artifact
/// a run produced, then lands them next to the outputs as manifest.json.
/// Contains no timestamps or host data, so identical runs produce identical
/// manifests.
class ManifestWriter {
 public:
  ManifestWriter(std::string subcommand, nlohmann::json config)
      : subcommand_(std::move(subcommand)), config_(std::move(config)) {}

  void record_output(const std::filesystem::path& path);
  void add_note(const std::string& key, const nlohmann::json& value);
  void write(const std::filesystem::path& manifest_path) const;

 private:
  std::string subcommand_;
  nlohmann::json config_;
  nlohmann::json notes_ = nlohmann::json::object();
  std::map<std::string, std::string> checksums_;
};

}  // namespace dlsc::tools

#endif  // DLSC_TOOLS_MANIFEST_HPP
