#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "gen.hpp"
#include "jamflow/datagen.hpp"
#include "jamflow/errors.hpp"
#include "jamflow/ingest.hpp"
#include "jamflow/matrix_io.hpp"
#include "tempdir.hpp"

namespace jamflow {
namespace {

using testing_support::TempDir;
using testing_support::write_file;

constexpr char const* kJam =
    R"({"location_x":-118.3,"location_y":34.05,"street":"Main St","city":"Los Angeles",)"
    R"("country":"US","road_type":2,"pub_date":1514800000000,"level":4,"speed":12.5,)"
    R"("length":900,"delay":300})";

TEST(ParseJamLine, AcceptsAFullRecord) {
  auto const r = parse_jam_line(kJam);
  ASSERT_TRUE(r.record) << r.reason;
  EXPECT_EQ(r.record->level, 4);
  EXPECT_EQ(r.record->street, "Main St");
  EXPECT_EQ(r.record->road_type, 2);
  EXPECT_DOUBLE_EQ(*r.record->speed, 12.5);
  EXPECT_EQ(r.record->pub_date.time_since_epoch().count(), 1514800000000);
}

TEST(ParseJamLine, OptionalFieldsMayBeAbsentOrNull) {
  auto const r = parse_jam_line(
      R"({"location_x":1,"location_y":2,"pub_date":5,"level":1,"street":null})");
  ASSERT_TRUE(r.record) << r.reason;
  EXPECT_FALSE(r.record->street);
  EXPECT_FALSE(r.record->speed);
  EXPECT_FALSE(r.record->road_type);
}

TEST(ParseJamLine, RejectionReasons) {
  EXPECT_EQ(parse_jam_line("{not json").reason, reason::kMalformedJson);
  EXPECT_EQ(parse_jam_line("[1,2]").reason, reason::kNotAnObject);
  EXPECT_EQ(parse_jam_line(R"({"location_y":2,"pub_date":5,"level":1})").reason,
            reason::kMissingField);
  EXPECT_EQ(parse_jam_line(R"({"location_x":1,"location_y":2,"pub_date":5,"level":"3"})").reason,
            reason::kBadFieldType);
  EXPECT_EQ(parse_jam_line(R"({"location_x":1,"location_y":2,"pub_date":5,"level":7})").reason,
            reason::kLevelOutOfRange);
  EXPECT_EQ(parse_jam_line(R"({"location_x":1,"location_y":2,"pub_date":0,"level":3})").reason,
            reason::kNonPositivePubDate);
  EXPECT_EQ(
      parse_jam_line(R"({"location_x":1,"location_y":2,"pub_date":5,"level":3,"speed":"x"})").reason,
      reason::kBadFieldType);
}

TEST(ParseAlertLine, RequiresAKnownType) {
  auto const base = std::string{R"({"location_x":1,"location_y":2,"pub_date":5)"};
  auto const ok = parse_alert_line(base + R"(,"type":"accident","report_description":"x"})");
  ASSERT_TRUE(ok.record);
  EXPECT_EQ(ok.record->event_type, EventType::kAccident);
  EXPECT_EQ(parse_alert_line(base + "}").reason, reason::kMissingField);
  EXPECT_EQ(parse_alert_line(base + R"(,"type":"meteor"})").reason, reason::kUnknownEventType);
}

TEST(ParseJams, SkipsBlankLinesAndCountsRejections) {
  std::istringstream in{std::string{kJam} + "\n\n   \ngarbage\n" + kJam + "\n"};
  auto const r = parse_jams(in);
  EXPECT_EQ(r.records.size(), 2U);
  EXPECT_EQ(r.report.rows_accepted, 2U);
  EXPECT_EQ(r.report.rows_rejected, 1U);
  EXPECT_EQ(r.report.rejection_reasons.at(std::string{reason::kMalformedJson}), 1U);
}

TEST(ParseJamsProperty, AcceptedPlusRejectedEqualsNonEmptyLines) {
  GenConfig config;
  config.n_jams = 300;
  std::istringstream clean_in{generate_jams(config)};
  std::vector<std::string> lines;
  for (std::string l; std::getline(clean_in, l);) lines.push_back(l);
  for (std::uint64_t seed = 0; seed != 25; ++seed) {
    SCOPED_TRACE(seed);
    gen::Rng rng{seed};
    std::string text;
    std::size_t non_empty = 0;
    for (auto l : lines) {
      switch (rng.integer(0, 9)) {
        case 0: l = l.substr(0, rng.size(0, l.size())); break;          // truncated
        case 1: l = "\t  "; break;                                     // blank
        case 2: l.insert(rng.size(0, l.size()), "\x01#"); break;       // corrupted
        case 3: l = R"({"level":3})"; break;                           // incomplete
        default: break;
      }
      if (l.find_first_not_of(" \t\r") != std::string::npos) ++non_empty;
      text += l + (rng.chance(0.1) ? "\r\n" : "\n");
    }
    std::istringstream in{text};
    auto const r = parse_jams(in);
    EXPECT_EQ(r.report.rows_accepted + r.report.rows_rejected, non_empty);
    std::size_t by_reason = 0;
    for (auto const& [k, v] : r.report.rejection_reasons) by_reason += v;
    EXPECT_EQ(by_reason, r.report.rows_rejected);
  }
}

TEST(Clean, DropsInvalidRowsWithReasons) {
  auto good = *parse_jam_line(kJam).record;
  auto neg = good;
  neg.speed = -1.0;
  auto island = good;
  island.location_x = 0;
  island.location_y = 0;
  auto late = good;
  late.pub_date = UtcMillis{std::chrono::milliseconds{1600000000000}};
  auto const out = clean({good, neg, island, late});
  EXPECT_EQ(out.records.size(), 1U);
  EXPECT_EQ(out.report.rejection_reasons.at(std::string{reason::kNegativeSpeed}), 1U);
  EXPECT_EQ(out.report.rejection_reasons.at(std::string{reason::kNullIsland}), 1U);
  EXPECT_EQ(out.report.rejection_reasons.at(std::string{reason::kOutsideWindow}), 1U);
  EXPECT_EQ(clean({late}, CleanConfig::no_window()).records.size(), 1U);
}

TEST(Schema, HonestIsLeakyWithoutTheJamMeasurements) {
  auto const honest = FeatureSchema::honest();
  auto const leaky = FeatureSchema::leaky();
  EXPECT_EQ(leaky.size(), honest.size() + 3);
  for (auto const* name : {"speed", "length", "delay"}) {
    EXPECT_FALSE(honest.index_of(name));
    EXPECT_TRUE(leaky.index_of(name));
  }
  EXPECT_NE(honest.fingerprint(), leaky.fingerprint());
  EXPECT_NO_THROW(honest.validate());
  EXPECT_NO_THROW(leaky.validate());
}

TEST(Schema, ValidationFailures) {
  FeatureSchema dup;
  dup.features = {{"a", FeatureKind::kNumeric, "speed"}, {"a", FeatureKind::kNumeric, "delay"}};
  EXPECT_THROW(dup.validate(), SchemaError);
  FeatureSchema unknown;
  unknown.features = {{"a", FeatureKind::kNumeric, "altitude"}};
  EXPECT_THROW(unknown.validate(), SchemaError);
  FeatureSchema kind;
  kind.features = {{"a", FeatureKind::kNumeric, "street"}};
  EXPECT_THROW(kind.validate(), SchemaError);
  std::vector<std::string> const bad{"speed", "nope"};
  EXPECT_THROW(FeatureSchema::from_sources(bad), SchemaError);
}

TEST(Encode, CategoriesAreLexicographicAndUnknownIsZero) {
  auto a = *parse_jam_line(kJam).record;
  auto b = a;
  b.street = "Alameda St";
  b.level = 1;
  auto c = a;
  c.street.reset();
  std::vector<JamRecord> const rows{a, b, c};
  std::vector<std::string> const fields{"street", "speed"};
  auto const schema = FeatureSchema::from_sources(fields);
  auto const out = encode(rows, schema);
  EXPECT_EQ(out.matrix.at(0, 0), 2.0);  // "Main St" after "Alameda St"
  EXPECT_EQ(out.matrix.at(1, 0), 1.0);
  EXPECT_TRUE(is_missing(out.matrix.at(2, 0)));
  EXPECT_EQ(out.matrix.labels()[0], 1);
  EXPECT_EQ(out.matrix.labels()[1], 0);

  auto d = a;
  d.street = "Zzz Rd";
  std::vector<JamRecord> const later{d};
  auto const frozen = encode(later, schema, &out.encoding);
  EXPECT_EQ(frozen.matrix.at(0, 0), EncodingMap::kUnknown);
  EXPECT_EQ(frozen.encoding, out.encoding);
}

TEST(Encode, TimeFieldsUsePacificTime) {
  auto const r = *parse_jam_line(kJam).record;  // 2018-01-01T09:46:40Z -> 01:46:40 PST Monday
  std::vector<JamRecord> const rows{r};
  auto const out = encode(rows, FeatureSchema::honest());
  auto const& s = out.matrix.schema();
  EXPECT_EQ(out.matrix.at(0, *s.index_of("month")), 1.0);
  EXPECT_EQ(out.matrix.at(0, *s.index_of("day")), 1.0);
  EXPECT_EQ(out.matrix.at(0, *s.index_of("hour")), 1.0);
  EXPECT_EQ(out.matrix.at(0, *s.index_of("min")), 46.0);
  EXPECT_EQ(out.matrix.at(0, *s.index_of("weekday")), 0.0);
}

TEST(IngestFiles, StreamingEqualsBatchPipeline) {
  TempDir dir;
  std::vector<std::filesystem::path> files;
  std::string all;
  for (int i = 0; i != 3; ++i) {
    GenConfig config;
    config.n_jams = 400;
    config.seed = 100 + static_cast<std::uint64_t>(i);
    auto text = generate_jams(config);
    if (i == 1) text += "oops\n{\"level\":2}\n";
    files.push_back(dir / ("jams" + std::to_string(i) + ".jsonl"));
    write_file(files.back(), text);
    all += text;
  }
  for (auto set : {FeatureSet::kLeaky, FeatureSet::kHonest}) {
    auto const schema = FeatureSchema::named(set);
    auto const streamed = ingest_jam_files(files, schema, CleanConfig::default_window());
    std::istringstream in{all};
    auto parsed = parse_jams(in);
    auto cleaned = clean(std::move(parsed.records));
    auto const batch = encode(cleaned.records, schema);
    EXPECT_EQ(streamed.matrix.schema(), batch.matrix.schema());
    EXPECT_EQ(streamed.encoding, batch.encoding);
    ASSERT_EQ(streamed.matrix.n_rows(), batch.matrix.n_rows());
    EXPECT_TRUE(std::equal(streamed.matrix.raw_values().begin(), streamed.matrix.raw_values().end(),
                           batch.matrix.raw_values().begin(),
                           [](double x, double y) { return x == y || (is_missing(x) && is_missing(y)); }));
    EXPECT_TRUE(std::ranges::equal(streamed.matrix.labels(), batch.matrix.labels()));
    EXPECT_EQ(streamed.report.rows_accepted, 1200U);
    EXPECT_EQ(streamed.report.rows_rejected, 2U);
    EXPECT_EQ(streamed.report.files_read, 3U);
  }
}

TEST(IngestFiles, MissingFileIsAnIoError) {
  std::vector<std::filesystem::path> const files{"/nonexistent/jams.jsonl"};
  EXPECT_THROW(ingest_jam_files(files, FeatureSchema::leaky(), CleanConfig::default_window()),
               IoError);
}

TEST(FeatureMatrix, TakeRowsAndSelect) {
  std::vector<std::string> const fields{"speed", "length", "delay"};
  auto const schema = FeatureSchema::from_sources(fields);
  FeatureMatrix const m{schema, {1, 2, 3, 4, 5, 6}, {0, 1}};
  std::vector<std::size_t> const order{1, 0};
  auto const t = m.take_rows(order);
  EXPECT_EQ(t.at(0, 0), 4.0);
  EXPECT_EQ(t.labels()[0], 1);
  std::vector<std::string> const sub{"delay", "speed"};
  auto const s = m.select(FeatureSchema::from_sources(sub));
  EXPECT_EQ(s.at(0, 0), 3.0);
  EXPECT_EQ(s.at(1, 1), 4.0);
  EXPECT_THROW(m.select(FeatureSchema::honest()), SchemaError);
  EXPECT_EQ(m.values()(1, 2), 6.0);
  EXPECT_THROW((FeatureMatrix{schema, {1, 2}, {0}}), ValidationError);
}

TEST(MatrixIo, RoundTripsValuesMissingCellsAndEncoding) {
  TempDir dir;
  GenConfig config;
  config.n_jams = 200;
  auto text = generate_jams(config);
  text += R"({"location_x":-118.3,"location_y":34.05,"pub_date":1514800000000,"level":2})" "\n";
  write_file(dir / "j.jsonl", text);
  std::vector<std::filesystem::path> const files{dir / "j.jsonl"};
  auto in = ingest_jam_files(files, FeatureSchema::leaky(), CleanConfig::default_window());
  MatrixFile const file{in.matrix, in.encoding, "m.jfmx.manifest.json"};
  write_matrix(dir / "m.jfmx", file);
  auto const back = read_matrix(dir / "m.jfmx");
  EXPECT_EQ(back.manifest, "m.jfmx.manifest.json");
  EXPECT_EQ(back.encoding, in.encoding);
  EXPECT_EQ(back.matrix.schema(), in.matrix.schema());
  ASSERT_EQ(back.matrix.n_rows(), 201U);
  for (std::size_t i = 0; i != back.matrix.raw_values().size(); ++i) {
    auto const a = back.matrix.raw_values()[i];
    auto const b = in.matrix.raw_values()[i];
    EXPECT_TRUE(a == b || (is_missing(a) && is_missing(b))) << i;
  }
  EXPECT_TRUE(is_missing(back.matrix.at(200, *back.matrix.schema().index_of("speed"))));
}

TEST(MatrixIo, ErrorsOnBadFiles) {
  TempDir dir;
  EXPECT_THROW(read_matrix(dir / "absent.jfmx"), IoError);
  write_file(dir / "bad.jfmx", "this is not a matrix file at all");
  EXPECT_THROW(read_matrix(dir / "bad.jfmx"), ValidationError);
  std::vector<std::string> const fields{"speed"};
  FeatureMatrix const m{FeatureSchema::from_sources(fields), {1, 2, 3}, {0, 1, 0}};
  write_matrix(dir / "ok.jfmx", {m, {}, ""});
  auto bytes = testing_support::read_file(dir / "ok.jfmx");
  write_file(dir / "short.jfmx", bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(read_matrix(dir / "short.jfmx"), IoError);
}

}  // namespace
}  // namespace jamflow
