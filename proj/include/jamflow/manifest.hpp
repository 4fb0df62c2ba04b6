#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace jamflow {

struct FileDigest {
  std::string path;
  std::string sha256;
};

/// Provenance record written next to every artifact.
struct RunManifest {
  std::string command_line;
  std::string config_hash;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> artifacts;
  std::optional<std::uint64_t> seed;
  std::size_t n_workers{1};
  std::string tool_version;
  std::string created_utc;

  nlohmann::ordered_json to_json() const;
};

/// "<artifact file name>.manifest.json", next to the artifact.
std::filesystem::path manifest_path_for(std::filesystem::path const& artifact);
FileDigest digest_file(std::filesystem::path const& path);
std::string tool_version();
/// ISO-8601 UTC to the second.
std::string utc_now();

void write_manifest(std::filesystem::path const& path, RunManifest const& manifest);

}  // namespace jamflow
