#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace jamflow {

using UtcMillis = std::chrono::sys_time<std::chrono::milliseconds>;

/// Pacific time is modelled as fixed UTC-8; the data window never crosses a DST change.
inline constexpr std::chrono::hours kPacificOffset{-8};

enum class EventType : std::uint8_t { kRoadClosed, kJam, kAccident, kHazard };

std::string_view to_string(EventType);
std::optional<EventType> parse_event_type(std::string_view);

enum class Weekday : std::uint8_t {
  kMonday, kTuesday, kWednesday, kThursday, kFriday, kSaturday, kSunday
};

std::string_view to_string(Weekday);

struct AlertRecord {
  double location_x{};  // longitude, degrees
  double location_y{};  // latitude, degrees
  std::optional<std::string> street;
  std::optional<std::string> city;
  std::optional<std::string> country;
  std::optional<std::int64_t> road_type;
  std::string report_description;
  EventType event_type{EventType::kJam};
  UtcMillis pub_date{};

  friend bool operator==(AlertRecord const&, AlertRecord const&) = default;
};

struct JamRecord {
  double location_x{};
  double location_y{};
  std::optional<std::string> street;
  std::optional<std::string> city;
  std::optional<std::string> country;
  std::optional<std::int64_t> road_type;
  UtcMillis pub_date{};
  int level{1};                 // 1 almost no jam .. 5 standstill
  std::optional<double> speed;  // mph
  std::optional<double> length; // meters
  std::optional<double> delay;  // seconds

  friend bool operator==(JamRecord const&, JamRecord const&) = default;
};

struct TimeParts {
  std::chrono::local_seconds date_pst{};
  unsigned month{};
  unsigned day{};
  unsigned hour{};
  unsigned min{};
  unsigned sec{};
  Weekday weekday{};

  friend bool operator==(TimeParts const&, TimeParts const&) = default;
};

inline constexpr int kMinLevel = 1;
inline constexpr int kMaxLevel = 5;

/// Positive class iff level > 2. Throws ValidationError outside 1..5.
bool derive_label(int level);

/// Splits a UTC publication time into Pacific (UTC-8) calendar fields.
/// Sub-second precision is truncated toward the earlier second.
TimeParts decompose_time(UtcMillis pub_date);

}  // namespace jamflow
