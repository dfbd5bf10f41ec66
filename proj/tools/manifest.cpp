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

#include "manifest.hpp"

#include <fstream>
#include <vector>

#include "dlsc/errors.hpp"
#include "dlsc/matrix_io.hpp"

namespace dlsc::tools {

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw_error(ErrorCode::kIo, "cannot open for checksum: " + path.string());
  std::uint64_t hash = 0xcbf29ce484222325ull;
  std::vector<char> buffer(1 << 16);
  while (in) {
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buffer[static_cast<std::size_t>(i)]);
      hash *= 0x100000001b3ull;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(hash));
  return std::string("fnv1a64:") + hex;
}

void ManifestWriter::record_output(const std::filesystem::path& path) {
  checksums_[path.filename().string()] = file_checksum(path);
}

void ManifestWriter::add_note(const std::string& key,
                              const nlohmann::json& value) {
  notes_[key] = value;
}

void ManifestWriter::write(const std::filesystem::path& manifest_path) const {
  nlohmann::json doc;
  doc["subcommand"] = subcommand_;
  doc["config"] = config_;
  doc["outputs"] = checksums_;
  if (!notes_.empty()) doc["notes"] = notes_;
  atomic_write_file(manifest_path,
                    [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
}

}  // namespace dlsc::tools
