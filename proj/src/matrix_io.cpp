#include "jamflow/matrix_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "jamflow/errors.hpp"

namespace jamflow {

static_assert(std::endian::native == std::endian::little,
              "matrix files are little-endian; add byte swapping for this target");

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json schema_to_json(FeatureSchema const& schema) {
  ordered_json features = ordered_json::array();
  for (auto const& f : schema.features) {
    features.push_back({{"name", f.name}, {"kind", to_string(f.kind)}, {"source", f.source}});
  }
  return {{"feature_set", to_string(schema.feature_set)},
          {"features", std::move(features)},
          {"fingerprint", schema.fingerprint()}};
}

FeatureSchema schema_from_json(json const& j) {
  FeatureSchema schema;
  auto const set = parse_feature_set(j.at("feature_set").get<std::string>());
  if (!set) {
    throw SchemaError{"unknown feature_set in schema"};
  }
  schema.feature_set = *set;
  for (auto const& f : j.at("features")) {
    auto const kind = f.at("kind").get<std::string>();
    schema.features.push_back({f.at("name").get<std::string>(),
                               kind == "categorical" ? FeatureKind::kCategorical
                                                     : FeatureKind::kNumeric,
                               f.at("source").get<std::string>()});
  }
  schema.validate();
  if (j.contains("fingerprint") && j["fingerprint"].get<std::string>() != schema.fingerprint()) {
    throw SchemaError{"schema fingerprint does not match its feature list"};
  }
  return schema;
}

ordered_json encoding_to_json(EncodingMap const& encoding) {
  ordered_json out = ordered_json::object();
  for (auto const& [feature, cats] : encoding.all()) {
    // Values in index order so the header reads as a lookup table.
    std::vector<std::string> by_index(cats.size());
    for (auto const& [name, idx] : cats) {
      by_index[static_cast<std::size_t>(idx - 1)] = name;
    }
    out[feature] = by_index;
  }
  return out;
}

EncodingMap encoding_from_json(json const& j) {
  EncodingMap encoding;
  for (auto const& [feature, values] : j.items()) {
    auto names = values.get<std::vector<std::string>>();
    if (!std::is_sorted(names.begin(), names.end()) ||
        std::adjacent_find(names.begin(), names.end()) != names.end()) {
      throw ValidationError{"encoding for '" + feature + "' is not strictly sorted"};
    }
    encoding.assign(feature, std::move(names));
  }
  return encoding;
}

void write_matrix(std::filesystem::path const& path, MatrixFile const& file) {
  auto const& m = file.matrix;
  ordered_json header = {{"format", "jamflow-matrix"},
                         {"version", kMatrixFormatVersion},
                         {"layout", "columnar-f64le+labels-u8"},
                         {"missing", "NaN"},
                         {"n_rows", m.n_rows()},
                         {"n_features", m.n_features()},
                         {"schema", schema_to_json(m.schema())},
                         {"encoding", encoding_to_json(file.encoding)},
                         {"manifest", file.manifest}};
  auto const text = header.dump();

  std::ofstream out{path, std::ios::binary | std::ios::trunc};
  if (!out) {
    throw_io("cannot create", path.string());
  }
  auto const put = [&](void const* data, std::size_t n) {
    out.write(static_cast<char const*>(data), static_cast<std::streamsize>(n));
  };
  std::uint32_t const version = kMatrixFormatVersion;
  std::uint64_t const header_len = text.size();
  put(kMatrixMagic, sizeof kMatrixMagic);
  put(&version, sizeof version);
  put(&header_len, sizeof header_len);
  put(text.data(), text.size());

  std::vector<double> column(m.n_rows());
  auto const values = m.values();
  for (Eigen::Index j = 0; j != values.cols(); ++j) {
    Eigen::Map<Eigen::VectorXd>{column.data(), values.rows()} = values.col(j);
    put(column.data(), column.size() * sizeof(double));
  }
  put(m.labels().data(), m.labels().size());
  if (!out.flush()) {
    throw_io("write failed", path.string());
  }
}

MatrixFile read_matrix(std::filesystem::path const& path) {
  std::ifstream in{path, std::ios::binary};
  if (!in) {
    throw_io("cannot open", path.string());
  }
  auto const get = [&](void* data, std::size_t n) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
      throw IoError{"truncated matrix file '" + path.string() + "'"};
    }
  };
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t header_len = 0;
  get(magic, sizeof magic);
  if (std::memcmp(magic, kMatrixMagic, sizeof magic) != 0) {
    throw ValidationError{"'" + path.string() + "' is not a jamflow matrix file"};
  }
  get(&version, sizeof version);
  if (version != kMatrixFormatVersion) {
    throw ValidationError{"unsupported matrix format version " + std::to_string(version)};
  }
  get(&header_len, sizeof header_len);
  std::string text(header_len, '\0');
  get(text.data(), text.size());
  auto const header = json::parse(text, nullptr, false);
  if (header.is_discarded()) {
    throw ValidationError{"matrix header is not valid JSON"};
  }

  auto schema = schema_from_json(header.at("schema"));
  auto const n_rows = header.at("n_rows").get<std::size_t>();
  auto const nf = schema.size();
  if (header.at("n_features").get<std::size_t>() != nf) {
    throw ValidationError{"matrix header n_features disagrees with schema"};
  }
  std::vector<double> values(n_rows * nf);
  std::vector<double> column(n_rows);
  for (std::size_t j = 0; j != nf; ++j) {
    get(column.data(), column.size() * sizeof(double));
    for (std::size_t r = 0; r != n_rows; ++r) {
      values[r * nf + j] = column[r];
    }
  }
  std::vector<std::uint8_t> labels(n_rows);
  get(labels.data(), labels.size());
  return {FeatureMatrix{std::move(schema), std::move(values), std::move(labels)},
          encoding_from_json(header.at("encoding")), header.value("manifest", "")};
}

}  // namespace jamflow
