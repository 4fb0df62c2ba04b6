#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "jamflow/event_model.hpp"

namespace jamflow {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixView = Eigen::Map<RowMatrix const>;

/// Missing values are a quiet NaN; every real feature value compares equal to itself.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) noexcept { return std::isnan(v); }

enum class FeatureKind : std::uint8_t { kNumeric, kCategorical };
enum class FeatureSet : std::uint8_t { kLeaky, kHonest, kCustom };

std::string_view to_string(FeatureKind);
std::string_view to_string(FeatureSet);
std::optional<FeatureSet> parse_feature_set(std::string_view);

struct FeatureSpec {
  std::string name;
  FeatureKind kind{FeatureKind::kNumeric};
  std::string source;  // jam field the value is derived from

  friend bool operator==(FeatureSpec const&, FeatureSpec const&) = default;
};

struct FeatureSchema {
  std::vector<FeatureSpec> features;
  FeatureSet feature_set{FeatureSet::kCustom};

  /// location, road type, street/city index and calendar fields.
  static FeatureSchema honest();
  /// honest plus the leak fields (speed, length, delay).
  static FeatureSchema leaky();
  static FeatureSchema named(FeatureSet);
  /// Custom schema from source field names; kinds follow the source.
  static FeatureSchema from_sources(std::span<std::string const> sources);

  /// Throws SchemaError on duplicate names, unknown sources or kind mismatches.
  void validate() const;
  std::size_t size() const noexcept { return features.size(); }
  std::optional<std::size_t> index_of(std::string_view name) const;
  /// Hex digest over (name, kind, source) in order.
  std::string fingerprint() const;

  friend bool operator==(FeatureSchema const&, FeatureSchema const&) = default;
};

/// Dense category indices per categorical feature. Index 0 is reserved for unknown.
class EncodingMap {
public:
  using Categories = std::map<std::string, std::int32_t, std::less<>>;

  static constexpr std::int32_t kUnknown = 0;

  /// Assigns 1..k in lexicographic order of the distinct values.
  void assign(std::string const& feature, std::vector<std::string> values);
  std::int32_t lookup(std::string_view feature, std::string_view value) const;
  Categories const* categories(std::string_view feature) const;
  std::map<std::string, Categories, std::less<>> const& all() const noexcept { return maps_; }

  friend bool operator==(EncodingMap const&, EncodingMap const&) = default;

private:
  std::map<std::string, Categories, std::less<>> maps_;
};

/// Row-major encoded features plus binary labels.
class FeatureMatrix {
public:
  FeatureMatrix() = default;
  FeatureMatrix(FeatureSchema schema, std::vector<double> values, std::vector<std::uint8_t> labels);

  std::size_t n_rows() const noexcept { return labels_.size(); }
  std::size_t n_features() const noexcept { return schema_.size(); }
  FeatureSchema const& schema() const noexcept { return schema_; }

  RowMatrixView values() const {
    return {values_.data(), static_cast<Eigen::Index>(n_rows()),
            static_cast<Eigen::Index>(n_features())};
  }
  std::span<double const> row(std::size_t r) const {
    return {values_.data() + r * n_features(), n_features()};
  }
  double at(std::size_t r, std::size_t f) const { return values_[r * n_features() + f]; }
  std::span<std::uint8_t const> labels() const noexcept { return labels_; }
  std::span<double const> raw_values() const noexcept { return values_; }

  /// Rows in the given order.
  FeatureMatrix take_rows(std::span<std::size_t const> rows) const;
  /// Columns selected by name; throws SchemaError if a name is absent.
  FeatureMatrix select(FeatureSchema const& target) const;

private:
  FeatureSchema schema_;
  std::vector<double> values_;
  std::vector<std::uint8_t> labels_;
};

struct IngestReport {
  std::size_t files_read{};
  std::size_t rows_accepted{};
  std::size_t rows_rejected{};
  std::map<std::string, std::size_t> rejection_reasons;

  void reject(std::string_view reason, std::size_t n = 1);
  void merge(IngestReport const& other);
  std::size_t total() const noexcept { return rows_accepted + rows_rejected; }

  friend bool operator==(IngestReport const&, IngestReport const&) = default;
};

namespace reason {
inline constexpr std::string_view kMalformedJson = "malformed_json";
inline constexpr std::string_view kNotAnObject = "not_an_object";
inline constexpr std::string_view kMissingField = "missing_field";
inline constexpr std::string_view kBadFieldType = "bad_field_type";
inline constexpr std::string_view kLevelOutOfRange = "level_out_of_range";
inline constexpr std::string_view kNonPositivePubDate = "nonpositive_pub_date";
inline constexpr std::string_view kUnknownEventType = "unknown_event_type";
inline constexpr std::string_view kNegativeSpeed = "negative_speed";
inline constexpr std::string_view kNegativeLength = "negative_length";
inline constexpr std::string_view kNegativeDelay = "negative_delay";
inline constexpr std::string_view kNullIsland = "null_island";
inline constexpr std::string_view kOutsideWindow = "outside_window";
}  // namespace reason

/// One parsed line: either a record or the reason it was rejected.
template <typename Record>
struct LineResult {
  std::optional<Record> record;
  std::string_view reason;
};

LineResult<JamRecord> parse_jam_line(std::string_view line);
LineResult<AlertRecord> parse_alert_line(std::string_view line);

template <typename Record>
struct ParseResult {
  std::vector<Record> records;
  IngestReport report;
};

/// Line-delimited JSON. Blank lines are skipped; bad lines are counted, never fatal.
/// Throws IoError if the stream is unreadable.
ParseResult<JamRecord> parse_jams(std::istream& in);
ParseResult<AlertRecord> parse_alerts(std::istream& in);

struct CleanConfig {
  std::optional<UtcMillis> window_begin;  // inclusive
  std::optional<UtcMillis> window_end;    // exclusive

  /// Pacific calendar days Dec 31 2017 .. Jan 8 2018.
  static CleanConfig default_window();
  static CleanConfig no_window() { return {}; }
};

/// Reason the record would be dropped, or empty when it is kept.
std::string_view clean_check(JamRecord const& record, CleanConfig const& config);

ParseResult<JamRecord> clean(std::vector<JamRecord> records,
                             CleanConfig const& config = CleanConfig::default_window());

/// Incremental encoder shared by the batch and streaming paths.
class MatrixBuilder {
public:
  /// With `frozen`, categorical values are looked up read-only (unknown -> 0).
  explicit MatrixBuilder(FeatureSchema schema, EncodingMap const* frozen = nullptr);

  void reserve(std::size_t rows);
  void add(JamRecord const& record);
  std::size_t rows() const noexcept { return labels_.size(); }

  struct Result {
    FeatureMatrix matrix;
    EncodingMap encoding;
  };
  Result finish() &&;

private:
  FeatureSchema schema_;
  EncodingMap const* frozen_;
  std::vector<std::uint8_t> sources_;
  bool needs_time_{false};
  std::vector<double> values_;
  std::vector<std::uint8_t> labels_;
  // Provisional first-seen ids per categorical column, remapped in finish().
  std::vector<std::unordered_map<std::string, std::int32_t>> provisional_;
};

/// Throws SchemaError if the schema is invalid.
MatrixBuilder::Result encode(std::span<JamRecord const> records, FeatureSchema const& schema,
                             EncodingMap const* existing = nullptr);

struct IngestResult {
  FeatureMatrix matrix;
  EncodingMap encoding;
  IngestReport report;
};

/// Streams jam files (in the given order) through parsing and cleaning into the
/// encoder without materialising records. Equivalent to encode(clean(parse_jams(...))).
IngestResult ingest_jam_files(std::span<std::filesystem::path const> files,
                              FeatureSchema const& schema, CleanConfig const& clean_config,
                              EncodingMap const* existing = nullptr);

/// Parses alert files for validation and reporting only.
IngestReport ingest_alert_files(std::span<std::filesystem::path const> files);

}  // namespace jamflow
