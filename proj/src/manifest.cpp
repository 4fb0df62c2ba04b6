#include "jamflow/manifest.hpp"

#include <chrono>
#include <fstream>

#include <fmt/format.h>

#include "jamflow/digest.hpp"
#include "jamflow/errors.hpp"

namespace jamflow {

nlohmann::ordered_json RunManifest::to_json() const {
  auto digests = [](std::vector<FileDigest> const& files) {
    auto arr = nlohmann::ordered_json::array();
    for (auto const& f : files) {
      arr.push_back({{"path", f.path}, {"sha256", f.sha256}});
    }
    return arr;
  };
  return {
      {"tool_version", tool_version},
      {"created_utc", created_utc},
      {"command_line", command_line},
      {"config_hash", config_hash},
      {"seed", seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json(nullptr)},
      {"n_workers", n_workers},
      {"inputs", digests(inputs)},
      {"artifacts", digests(artifacts)},
  };
}

std::filesystem::path manifest_path_for(std::filesystem::path const& artifact) {
  auto p = artifact;
  p.replace_filename(artifact.filename().string() + ".manifest.json");
  return p;
}

FileDigest digest_file(std::filesystem::path const& path) {
  return {path.string(), sha256_file(path)};
}

std::string tool_version() { return JAMFLOW_VERSION; }

std::string utc_now() {
  auto const now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  auto const day = std::chrono::floor<std::chrono::days>(now);
  std::chrono::year_month_day const ymd{day};
  std::chrono::hh_mm_ss const hms{now - day};
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     hms.hours().count(), hms.minutes().count(), hms.seconds().count());
}

void write_manifest(std::filesystem::path const& path, RunManifest const& manifest) {
  std::ofstream out{path, std::ios::binary | std::ios::trunc};
  if (!out) {
    throw_io("cannot open manifest for writing", path.string());
  }
  out << manifest.to_json().dump(2) << '\n';
  if (!out) {
    throw_io("failed writing manifest", path.string());
  }
}

}  // namespace jamflow
