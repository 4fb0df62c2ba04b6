#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "jamflow/datagen.hpp"
#include "jamflow/errors.hpp"
#include "jamflow/ingest.hpp"

namespace jamflow {
namespace {

TEST(SeededStream, EngineIsTheStandardMersenneTwister) {
  // The standard fixes the 10000th output of a default-seeded mt19937_64.
  SeededStream s{5489};
  std::uint64_t x = 0;
  for (int i = 0; i != 10000; ++i) x = s.next();
  EXPECT_EQ(x, 9981545732273789042ULL);
}

TEST(SeededStream, ConversionsStayInRange) {
  SeededStream s{1};
  double sum = 0;
  double sq = 0;
  constexpr int kN = 200000;
  for (int i = 0; i != kN; ++i) {
    auto const u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(s.index(7), 7U);
    auto const z = s.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / kN, 0.0, 0.01);
  EXPECT_NEAR(sq / kN, 1.0, 0.02);
}

TEST(SeededStream, WeightedDrawsNeverPickZeroWeights) {
  SeededStream s{2};
  std::array<double, 4> const w{0.0, 1.0, 0.0, 3.0};
  std::array<int, 4> hits{};
  for (int i = 0; i != 40000; ++i) ++hits[s.weighted(w)];
  EXPECT_EQ(hits[0], 0);
  EXPECT_EQ(hits[2], 0);
  EXPECT_NEAR(hits[3] / 40000.0, 0.75, 0.01);
}

std::vector<std::string> lines_of(std::string const& text) {
  std::vector<std::string> out;
  std::istringstream in{text};
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

TEST(GenerateJams, DeterministicAndExactlySized) {
  GenConfig c;
  c.n_jams = 1000;
  auto const a = generate_jams(c);
  EXPECT_EQ(a, generate_jams(c));
  EXPECT_EQ(lines_of(a).size(), 1000U);
  c.seed = 43;
  EXPECT_NE(a, generate_jams(c));
  c.n_jams = 0;
  EXPECT_TRUE(generate_jams(c).empty());
}

TEST(GenerateJams, LinesRoundTripThroughIngestWithoutRejections) {
  for (double noise : {0.0, 0.3}) {
    GenConfig c;
    c.n_jams = 5000;
    c.coupling_noise = noise;
    std::istringstream in{generate_jams(c)};
    auto parsed = parse_jams(in);
    EXPECT_EQ(parsed.report.rows_rejected, 0U);
    auto const cleaned = clean(std::move(parsed.records));
    EXPECT_EQ(cleaned.report.rows_rejected, 0U);
    EXPECT_EQ(cleaned.records.size(), 5000U);
  }
}

TEST(GenerateJams, NoiseFreeMeasurementsDetermineTheLevel) {
  GenConfig c;
  c.n_jams = 20000;
  std::istringstream in{generate_jams(c)};
  auto const parsed = parse_jams(in);
  // Each measurement alone identifies the level: nearest band midpoint.
  auto nearest = [](double v, std::array<double, 5> const& mid) {
    int best = 0;
    for (int l = 1; l != 5; ++l) {
      if (std::abs(v - mid[static_cast<std::size_t>(l)]) <
          std::abs(v - mid[static_cast<std::size_t>(best)])) {
        best = l;
      }
    }
    return best + 1;
  };
  for (auto const& r : parsed.records) {
    ASSERT_EQ(nearest(*r.speed, kSpeedMidMph), r.level);
    ASSERT_EQ(nearest(*r.length, kLengthMidM), r.level);
    ASSERT_EQ(nearest(*r.delay, kDelayMidSec), r.level);
  }
}

TEST(GenerateJams, DefaultClassBalanceIsAboutTwoThirdsPositive) {
  GenConfig c;
  c.n_jams = 50000;
  std::istringstream in{generate_jams(c)};
  auto const parsed = parse_jams(in);
  double positives = 0;
  for (auto const& r : parsed.records) positives += derive_label(r.level);
  EXPECT_NEAR(positives / 50000.0, 0.66, 0.03);
}

TEST(GenerateJams, PerRowByteBound) {
  GenConfig c;
  c.n_jams = 5000;
  c.coupling_noise = 2.0;
  for (auto const& l : lines_of(generate_jams(c))) {
    EXPECT_LT(l.size(), 320U);
  }
}

TEST(GenerateAlerts, AllEventTypesAppearAndParse) {
  GenConfig c;
  c.n_alerts = 10000;
  std::istringstream in{generate_alerts(c)};
  auto const parsed = parse_alerts(in);
  EXPECT_EQ(parsed.report.rows_rejected, 0U);
  std::set<EventType> seen;
  for (auto const& a : parsed.records) seen.insert(a.event_type);
  EXPECT_EQ(seen.size(), 4U);
  c.n_alerts = 0;
  EXPECT_TRUE(generate_alerts(c).empty());
}

TEST(GenConfig, RejectsInvalidSettings) {
  GenConfig c;
  c.level_weights = {1, -1, 1, 1, 1};
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.level_weights = {0, 0, 0, 0, 0};
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.window_end = c.window_begin;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.coupling_noise = -0.1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.event_weights = {0, 0, 0, 0};
  EXPECT_THROW(generate_alerts(c), ConfigError);
}

}  // namespace
}  // namespace jamflow
