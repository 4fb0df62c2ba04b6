#include "jamflow/ingest.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "jamflow/digest.hpp"
#include "jamflow/errors.hpp"

namespace jamflow {

using nlohmann::json;

namespace {

enum class Source : std::uint8_t {
  kLocationX, kLocationY, kRoadType, kStreet, kCity, kCountry,
  kMonth, kDay, kHour, kMin, kSec, kWeekday,
  kSpeed, kLength, kDelay,
};

struct SourceInfo {
  std::string_view name;
  Source source;
  FeatureKind kind;
};

constexpr std::array<SourceInfo, 15> kSources{{
    {"location_x", Source::kLocationX, FeatureKind::kNumeric},
    {"location_y", Source::kLocationY, FeatureKind::kNumeric},
    {"road_type", Source::kRoadType, FeatureKind::kNumeric},
    {"street", Source::kStreet, FeatureKind::kCategorical},
    {"city", Source::kCity, FeatureKind::kCategorical},
    {"country", Source::kCountry, FeatureKind::kCategorical},
    {"month", Source::kMonth, FeatureKind::kNumeric},
    {"day", Source::kDay, FeatureKind::kNumeric},
    {"hour", Source::kHour, FeatureKind::kNumeric},
    {"min", Source::kMin, FeatureKind::kNumeric},
    {"sec", Source::kSec, FeatureKind::kNumeric},
    {"weekday", Source::kWeekday, FeatureKind::kNumeric},
    {"speed", Source::kSpeed, FeatureKind::kNumeric},
    {"length", Source::kLength, FeatureKind::kNumeric},
    {"delay", Source::kDelay, FeatureKind::kNumeric},
}};

SourceInfo const* find_source(std::string_view name) {
  auto const it = std::find_if(begin(kSources), end(kSources),
                               [&](SourceInfo const& s) { return s.name == name; });
  return it == end(kSources) ? nullptr : &*it;
}

constexpr std::array<std::string_view, 10> kHonestSources{
    "location_x", "location_y", "road_type", "street", "city",
    "month",      "day",        "hour",      "min",    "weekday"};
constexpr std::array<std::string_view, 3> kLeakOnlySources{"speed", "length", "delay"};

bool is_time_source(Source s) { return s >= Source::kMonth && s <= Source::kWeekday; }

std::string_view trim(std::string_view s) {
  auto const b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) {
    return {};
  }
  auto const e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Field readers return an empty reason on success.
std::string_view read_required_number(json const& obj, char const* key, double& out) {
  auto const it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    return reason::kMissingField;
  }
  if (!it->is_number()) {
    return reason::kBadFieldType;
  }
  out = it->get<double>();
  return {};
}

std::string_view read_required_integer(json const& obj, char const* key, std::int64_t& out) {
  auto const it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    return reason::kMissingField;
  }
  if (!it->is_number_integer()) {
    return reason::kBadFieldType;
  }
  out = it->get<std::int64_t>();
  return {};
}

std::string_view read_optional_number(json const& obj, char const* key,
                                      std::optional<double>& out) {
  auto const it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    return {};
  }
  if (!it->is_number()) {
    return reason::kBadFieldType;
  }
  out = it->get<double>();
  return {};
}

std::string_view read_optional_integer(json const& obj, char const* key,
                                       std::optional<std::int64_t>& out) {
  auto const it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    return {};
  }
  if (!it->is_number_integer()) {
    return reason::kBadFieldType;
  }
  out = it->get<std::int64_t>();
  return {};
}

std::string_view read_optional_string(json const& obj, char const* key,
                                      std::optional<std::string>& out) {
  auto const it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    return {};
  }
  if (!it->is_string()) {
    return reason::kBadFieldType;
  }
  out = it->get<std::string>();
  return {};
}

// Fields common to alerts and jams.
template <typename Record>
std::string_view read_common(json const& obj, Record& r) {
  std::int64_t pub_date = 0;
  for (auto const reason : {
           read_required_number(obj, "location_x", r.location_x),
           read_required_number(obj, "location_y", r.location_y),
           read_optional_string(obj, "street", r.street),
           read_optional_string(obj, "city", r.city),
           read_optional_string(obj, "country", r.country),
           read_optional_integer(obj, "road_type", r.road_type),
           read_required_integer(obj, "pub_date", pub_date),
       }) {
    if (!reason.empty()) {
      return reason;
    }
  }
  if (pub_date <= 0) {
    return reason::kNonPositivePubDate;
  }
  r.pub_date = UtcMillis{std::chrono::milliseconds{pub_date}};
  return {};
}

std::optional<json> parse_object(std::string_view line, std::string_view& why) {
  auto obj = json::parse(line, nullptr, false);
  if (obj.is_discarded()) {
    why = reason::kMalformedJson;
    return std::nullopt;
  }
  if (!obj.is_object()) {
    why = reason::kNotAnObject;
    return std::nullopt;
  }
  return obj;
}

template <typename Record, typename ParseLine>
ParseResult<Record> parse_stream(std::istream& in, ParseLine parse_line) {
  if (!in) {
    throw IoError{"input stream is not readable"};
  }
  ParseResult<Record> out;
  std::string line;
  while (std::getline(in, line)) {
    auto const text = trim(line);
    if (text.empty()) {
      continue;
    }
    auto parsed = parse_line(text);
    if (parsed.record) {
      out.records.push_back(std::move(*parsed.record));
      ++out.report.rows_accepted;
    } else {
      out.report.reject(parsed.reason);
    }
  }
  if (in.bad()) {
    throw IoError{"read error on input stream"};
  }
  return out;
}

std::size_t count_lines(std::filesystem::path const& path) {
  std::ifstream in{path, std::ios::binary};
  if (!in) {
    throw_io("cannot open", path.string());
  }
  std::vector<char> buf(1 << 20);
  std::size_t n = 0;
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    n += static_cast<std::size_t>(
        std::count(buf.data(), buf.data() + in.gcount(), '\n'));
  }
  return n + 1;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(FeatureKind k) {
  return k == FeatureKind::kNumeric ? "numeric" : "categorical";
}

std::string_view to_string(FeatureSet s) {
  switch (s) {
    case FeatureSet::kLeaky: return "leaky";
    case FeatureSet::kHonest: return "honest";
    case FeatureSet::kCustom: return "custom";
  }
  return "custom";
}

std::optional<FeatureSet> parse_feature_set(std::string_view s) {
  if (s == "leaky") return FeatureSet::kLeaky;
  if (s == "honest") return FeatureSet::kHonest;
  if (s == "custom") return FeatureSet::kCustom;
  return std::nullopt;
}

FeatureSchema FeatureSchema::from_sources(std::span<std::string const> sources) {
  FeatureSchema s;
  for (auto const& name : sources) {
    auto const* info = find_source(name);
    if (info == nullptr) {
      throw SchemaError{"schema references unknown jam field '" + name + "'"};
    }
    s.features.push_back({name, info->kind, name});
  }
  return s;
}

FeatureSchema FeatureSchema::honest() {
  FeatureSchema s;
  for (auto const name : kHonestSources) {
    s.features.push_back({std::string{name}, find_source(name)->kind, std::string{name}});
  }
  s.feature_set = FeatureSet::kHonest;
  return s;
}

FeatureSchema FeatureSchema::leaky() {
  auto s = honest();
  for (auto const name : kLeakOnlySources) {
    s.features.push_back({std::string{name}, FeatureKind::kNumeric, std::string{name}});
  }
  s.feature_set = FeatureSet::kLeaky;
  return s;
}

FeatureSchema FeatureSchema::named(FeatureSet set) {
  switch (set) {
    case FeatureSet::kLeaky: return leaky();
    case FeatureSet::kHonest: return honest();
    case FeatureSet::kCustom: break;
  }
  throw SchemaError{"custom feature sets have no predefined schema"};
}

void FeatureSchema::validate() const {
  std::set<std::string_view> seen;
  for (auto const& f : features) {
    if (!seen.insert(f.name).second) {
      throw SchemaError{"duplicate feature name '" + f.name + "'"};
    }
    auto const* info = find_source(f.source);
    if (info == nullptr) {
      throw SchemaError{"feature '" + f.name + "' references field '" + f.source +
                        "' absent from jam records"};
    }
    if (info->kind != f.kind) {
      throw SchemaError{"feature '" + f.name + "' declared " + std::string{to_string(f.kind)} +
                        " but field '" + f.source + "' is " +
                        std::string{to_string(info->kind)}};
    }
  }
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
  for (auto i = 0U; i != features.size(); ++i) {
    if (features[i].name == name) {
      return i;
    }
  }
  return std::nullopt;
}

std::string FeatureSchema::fingerprint() const {
  std::string canon;
  for (auto const& f : features) {
    canon += fmt::format("{}|{}|{};", f.name, to_string(f.kind), f.source);
  }
  return sha256_hex(canon).substr(0, 16);
}

// ---------------------------------------------------------------------------

void EncodingMap::assign(std::string const& feature, std::vector<std::string> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  auto& cats = maps_[feature];
  cats.clear();
  for (auto i = 0U; i != values.size(); ++i) {
    cats.emplace(std::move(values[i]), static_cast<std::int32_t>(i + 1));
  }
}

std::int32_t EncodingMap::lookup(std::string_view feature, std::string_view value) const {
  auto const* cats = categories(feature);
  if (cats == nullptr) {
    return kUnknown;
  }
  auto const it = cats->find(value);
  return it == cats->end() ? kUnknown : it->second;
}

EncodingMap::Categories const* EncodingMap::categories(std::string_view feature) const {
  auto const it = maps_.find(feature);
  return it == maps_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------

FeatureMatrix::FeatureMatrix(FeatureSchema schema, std::vector<double> values,
                             std::vector<std::uint8_t> labels)
    : schema_{std::move(schema)}, values_{std::move(values)}, labels_{std::move(labels)} {
  if (values_.size() != labels_.size() * schema_.size()) {
    throw ValidationError{fmt::format("feature matrix holds {} values for {} rows x {} features",
                                      values_.size(), labels_.size(), schema_.size())};
  }
}

FeatureMatrix FeatureMatrix::take_rows(std::span<std::size_t const> rows) const {
  auto const nf = n_features();
  std::vector<double> values(rows.size() * nf);
  std::vector<std::uint8_t> labels(rows.size());
  for (auto i = 0U; i != rows.size(); ++i) {
    auto const src = row(rows[i]);
    std::copy(src.begin(), src.end(), values.begin() + static_cast<std::ptrdiff_t>(i * nf));
    labels[i] = labels_[rows[i]];
  }
  return {schema_, std::move(values), std::move(labels)};
}

FeatureMatrix FeatureMatrix::select(FeatureSchema const& target) const {
  std::vector<std::size_t> cols;
  for (auto const& f : target.features) {
    auto const idx = schema_.index_of(f.name);
    if (!idx || !(schema_.features[*idx] == f)) {
      throw SchemaError{"feature '" + f.name + "' is not present in the matrix"};
    }
    cols.push_back(*idx);
  }
  auto const n = n_rows();
  std::vector<double> values(n * cols.size());
  for (auto r = 0U; r != n; ++r) {
    for (auto j = 0U; j != cols.size(); ++j) {
      values[r * cols.size() + j] = at(r, cols[j]);
    }
  }
  return {target, std::move(values), labels_};
}

// ---------------------------------------------------------------------------

void IngestReport::reject(std::string_view why, std::size_t n) {
  rows_rejected += n;
  rejection_reasons[std::string{why}] += n;
}

void IngestReport::merge(IngestReport const& other) {
  files_read += other.files_read;
  rows_accepted += other.rows_accepted;
  rows_rejected += other.rows_rejected;
  for (auto const& [k, v] : other.rejection_reasons) {
    rejection_reasons[k] += v;
  }
}

// ---------------------------------------------------------------------------

LineResult<JamRecord> parse_jam_line(std::string_view line) {
  std::string_view why;
  auto const obj = parse_object(line, why);
  if (!obj) {
    return {std::nullopt, why};
  }
  JamRecord r;
  if (why = read_common(*obj, r); !why.empty()) {
    return {std::nullopt, why};
  }
  std::int64_t level = 0;
  for (auto const w : {read_required_integer(*obj, "level", level),
                       read_optional_number(*obj, "speed", r.speed),
                       read_optional_number(*obj, "length", r.length),
                       read_optional_number(*obj, "delay", r.delay)}) {
    if (!w.empty()) {
      return {std::nullopt, w};
    }
  }
  if (level < kMinLevel || level > kMaxLevel) {
    return {std::nullopt, reason::kLevelOutOfRange};
  }
  r.level = static_cast<int>(level);
  return {std::move(r), {}};
}

LineResult<AlertRecord> parse_alert_line(std::string_view line) {
  std::string_view why;
  auto const obj = parse_object(line, why);
  if (!obj) {
    return {std::nullopt, why};
  }
  AlertRecord r;
  if (why = read_common(*obj, r); !why.empty()) {
    return {std::nullopt, why};
  }
  std::optional<std::string> description;
  std::optional<std::string> type;
  for (auto const w : {read_optional_string(*obj, "report_description", description),
                       read_optional_string(*obj, "type", type)}) {
    if (!w.empty()) {
      return {std::nullopt, w};
    }
  }
  if (!type) {
    return {std::nullopt, reason::kMissingField};
  }
  auto const event = parse_event_type(*type);
  if (!event) {
    return {std::nullopt, reason::kUnknownEventType};
  }
  r.event_type = *event;
  r.report_description = description.value_or("");
  return {std::move(r), {}};
}

ParseResult<JamRecord> parse_jams(std::istream& in) {
  return parse_stream<JamRecord>(in, parse_jam_line);
}

ParseResult<AlertRecord> parse_alerts(std::istream& in) {
  return parse_stream<AlertRecord>(in, parse_alert_line);
}

// ---------------------------------------------------------------------------

CleanConfig CleanConfig::default_window() {
  using namespace std::chrono;
  auto const begin = sys_days{year{2017} / December / 31} - kPacificOffset;
  auto const end = sys_days{year{2018} / January / 9} - kPacificOffset;
  return {UtcMillis{begin}, UtcMillis{end}};
}

std::string_view clean_check(JamRecord const& r, CleanConfig const& config) {
  if (r.speed && *r.speed < 0.0) return reason::kNegativeSpeed;
  if (r.length && *r.length < 0.0) return reason::kNegativeLength;
  if (r.delay && *r.delay < 0.0) return reason::kNegativeDelay;
  if (r.location_x == 0.0 && r.location_y == 0.0) return reason::kNullIsland;
  if ((config.window_begin && r.pub_date < *config.window_begin) ||
      (config.window_end && r.pub_date >= *config.window_end)) {
    return reason::kOutsideWindow;
  }
  return {};
}

ParseResult<JamRecord> clean(std::vector<JamRecord> records, CleanConfig const& config) {
  ParseResult<JamRecord> out;
  out.records.reserve(records.size());
  for (auto& r : records) {
    if (auto const why = clean_check(r, config); !why.empty()) {
      out.report.reject(why);
    } else {
      out.records.push_back(std::move(r));
      ++out.report.rows_accepted;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

MatrixBuilder::MatrixBuilder(FeatureSchema schema, EncodingMap const* frozen)
    : schema_{std::move(schema)}, frozen_{frozen}, provisional_(schema_.size()) {
  schema_.validate();
  for (auto const& f : schema_.features) {
    auto const source = find_source(f.source)->source;
    sources_.push_back(static_cast<std::uint8_t>(source));
    needs_time_ = needs_time_ || is_time_source(source);
  }
}

void MatrixBuilder::reserve(std::size_t rows) {
  values_.reserve(rows * schema_.size());
  labels_.reserve(rows);
}

void MatrixBuilder::add(JamRecord const& r) {
  auto const label = derive_label(r.level);
  auto const time = needs_time_ ? decompose_time(r.pub_date) : TimeParts{};
  for (auto j = 0U; j != schema_.size(); ++j) {
    auto const& feature = schema_.features[j];
    auto const source = static_cast<Source>(sources_[j]);
    auto const opt = [](auto const& o) { return o ? static_cast<double>(*o) : kMissing; };
    auto const category = [&](std::optional<std::string> const& text) -> double {
      if (!text) {
        return kMissing;
      }
      if (frozen_ != nullptr) {
        return frozen_->lookup(feature.name, *text);
      }
      auto& ids = provisional_[j];
      auto const [it, inserted] =
          ids.try_emplace(*text, static_cast<std::int32_t>(ids.size() + 1));
      return it->second;
    };
    double v = kMissing;
    switch (source) {
      case Source::kLocationX: v = r.location_x; break;
      case Source::kLocationY: v = r.location_y; break;
      case Source::kRoadType: v = opt(r.road_type); break;
      case Source::kStreet: v = category(r.street); break;
      case Source::kCity: v = category(r.city); break;
      case Source::kCountry: v = category(r.country); break;
      case Source::kMonth: v = time.month; break;
      case Source::kDay: v = time.day; break;
      case Source::kHour: v = time.hour; break;
      case Source::kMin: v = time.min; break;
      case Source::kSec: v = time.sec; break;
      case Source::kWeekday: v = static_cast<double>(time.weekday); break;
      case Source::kSpeed: v = opt(r.speed); break;
      case Source::kLength: v = opt(r.length); break;
      case Source::kDelay: v = opt(r.delay); break;
    }
    values_.push_back(v);
  }
  labels_.push_back(label ? 1 : 0);
}

MatrixBuilder::Result MatrixBuilder::finish() && {
  auto const nf = schema_.size();
  EncodingMap encoding;
  if (frozen_ != nullptr) {
    encoding = *frozen_;
  } else {
    for (auto j = 0U; j != nf; ++j) {
      auto const& feature = schema_.features[j];
      if (feature.kind != FeatureKind::kCategorical) {
        continue;
      }
      auto const& ids = provisional_[j];
      std::vector<std::string> names;
      names.reserve(ids.size());
      for (auto const& [name, id] : ids) {
        names.push_back(name);
      }
      encoding.assign(feature.name, names);
      std::vector<double> remap(ids.size() + 1, 0.0);
      for (auto const& [name, id] : ids) {
        remap[static_cast<std::size_t>(id)] = encoding.lookup(feature.name, name);
      }
      for (auto r = 0U; r != labels_.size(); ++r) {
        auto& v = values_[r * nf + j];
        if (!is_missing(v)) {
          v = remap[static_cast<std::size_t>(v)];
        }
      }
    }
  }
  return {FeatureMatrix{std::move(schema_), std::move(values_), std::move(labels_)},
          std::move(encoding)};
}

MatrixBuilder::Result encode(std::span<JamRecord const> records, FeatureSchema const& schema,
                             EncodingMap const* existing) {
  MatrixBuilder builder{schema, existing};
  builder.reserve(records.size());
  for (auto const& r : records) {
    builder.add(r);
  }
  return std::move(builder).finish();
}

IngestResult ingest_jam_files(std::span<std::filesystem::path const> files,
                              FeatureSchema const& schema, CleanConfig const& clean_config,
                              EncodingMap const* existing) {
  MatrixBuilder builder{schema, existing};
  std::size_t expected = 0;
  for (auto const& f : files) {
    expected += count_lines(f);
  }
  builder.reserve(expected);

  IngestReport report;
  std::string line;
  for (auto const& path : files) {
    std::ifstream in{path, std::ios::binary};
    if (!in) {
      throw_io("cannot open", path.string());
    }
    while (std::getline(in, line)) {
      auto const text = trim(line);
      if (text.empty()) {
        continue;
      }
      auto parsed = parse_jam_line(text);
      if (!parsed.record) {
        report.reject(parsed.reason);
        continue;
      }
      if (auto const why = clean_check(*parsed.record, clean_config); !why.empty()) {
        report.reject(why);
        continue;
      }
      builder.add(*parsed.record);
      ++report.rows_accepted;
    }
    if (in.bad()) {
      throw_io("read failed", path.string());
    }
    ++report.files_read;
  }
  auto [matrix, encoding] = std::move(builder).finish();
  return {std::move(matrix), std::move(encoding), std::move(report)};
}

IngestReport ingest_alert_files(std::span<std::filesystem::path const> files) {
  IngestReport report;
  for (auto const& path : files) {
    std::ifstream in{path, std::ios::binary};
    if (!in) {
      throw_io("cannot open", path.string());
    }
    auto parsed = parse_alerts(in);
    parsed.report.files_read = 1;
    report.merge(parsed.report);
  }
  return report;
}

}  // namespace jamflow
