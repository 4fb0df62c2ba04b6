#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "jamflow/ingest.hpp"

namespace jamflow {

inline constexpr char kMatrixMagic[4] = {'J', 'F', 'M', 'X'};
inline constexpr std::uint32_t kMatrixFormatVersion = 1;

struct MatrixFile {
  FeatureMatrix matrix;
  EncodingMap encoding;
  std::string manifest;  // sidecar manifest file name, may be empty
};

nlohmann::ordered_json schema_to_json(FeatureSchema const&);
FeatureSchema schema_from_json(nlohmann::json const&);
nlohmann::ordered_json encoding_to_json(EncodingMap const&);
EncodingMap encoding_from_json(nlohmann::json const&);

/// Layout (little-endian):
///   "JFMX" | u32 version | u64 header bytes | JSON header |
///   per feature: n_rows f64 | labels: n_rows u8
void write_matrix(std::filesystem::path const& path, MatrixFile const& file);
MatrixFile read_matrix(std::filesystem::path const& path);

}  // namespace jamflow
