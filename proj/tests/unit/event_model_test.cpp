#include <gtest/gtest.h>

#include "gen.hpp"
#include "jamflow/errors.hpp"
#include "jamflow/event_model.hpp"
#include "oracles.hpp"

namespace jamflow {
namespace {

UtcMillis at_ms(std::int64_t ms) { return UtcMillis{std::chrono::milliseconds{ms}}; }

TEST(Label, PositiveAboveLevelTwo) {
  EXPECT_FALSE(derive_label(1));
  EXPECT_FALSE(derive_label(2));
  EXPECT_TRUE(derive_label(3));
  EXPECT_TRUE(derive_label(4));
  EXPECT_TRUE(derive_label(5));
  EXPECT_THROW(derive_label(0), ValidationError);
  EXPECT_THROW(derive_label(6), ValidationError);
}

TEST(EventType, NamesRoundTrip) {
  for (auto t : {EventType::kRoadClosed, EventType::kJam, EventType::kAccident, EventType::kHazard}) {
    EXPECT_EQ(parse_event_type(to_string(t)), t);
  }
  EXPECT_FALSE(parse_event_type("JAM"));
  EXPECT_FALSE(parse_event_type(""));
}

TEST(DecomposeTime, KnownInstants) {
  // 2018-01-01T00:30:15Z is 2017-12-31 16:30:15 in UTC-8, a Sunday.
  auto const t = decompose_time(at_ms(1514766615000));
  EXPECT_EQ(t.month, 12U);
  EXPECT_EQ(t.day, 31U);
  EXPECT_EQ(t.hour, 16U);
  EXPECT_EQ(t.min, 30U);
  EXPECT_EQ(t.sec, 15U);
  EXPECT_EQ(t.weekday, Weekday::kSunday);
  // One millisecond before Pacific midnight stays on the earlier day.
  auto const edge = decompose_time(at_ms(1514793600000 - 1));
  EXPECT_EQ(edge.day, 31U);
  EXPECT_EQ(edge.hour, 23U);
  EXPECT_EQ(edge.sec, 59U);
  EXPECT_EQ(decompose_time(at_ms(1514793600000)).day, 1U);
}

TEST(DecomposeTimeProperty, MatchesCivilCalendarOracle) {
  gen::Rng rng{17};
  for (int i = 0; i != 20000; ++i) {
    // Anything from 1971 to 2100, with a bias towards the data window.
    auto const ms = i % 2 == 0 ? rng.integer(31'536'000'000LL, 4'102'444'800'000LL)
                               : rng.integer(1514707200000LL, 1515484800000LL);
    auto const got = decompose_time(at_ms(ms));
    auto const want = oracle::pacific_fields(ms);
    ASSERT_EQ(got.month, want.month) << ms;
    ASSERT_EQ(got.day, want.day) << ms;
    ASSERT_EQ(got.hour, want.hour) << ms;
    ASSERT_EQ(got.min, want.min) << ms;
    ASSERT_EQ(got.sec, want.sec) << ms;
    ASSERT_EQ(static_cast<unsigned>(got.weekday), want.weekday) << ms;
  }
}

}  // namespace
}  // namespace jamflow
