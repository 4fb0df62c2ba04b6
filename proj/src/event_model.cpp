#include "jamflow/event_model.hpp"

#include <array>

#include "jamflow/errors.hpp"

namespace jamflow {

namespace {

constexpr std::array<std::string_view, 4> kEventNames{"road_closed", "jam", "accident",
                                                      "hazard"};
constexpr std::array<std::string_view, 7> kWeekdayNames{
    "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"};

}  // namespace

std::string_view to_string(EventType t) { return kEventNames[static_cast<std::size_t>(t)]; }

std::optional<EventType> parse_event_type(std::string_view s) {
  for (auto i = 0U; i != kEventNames.size(); ++i) {
    if (kEventNames[i] == s) {
      return static_cast<EventType>(i);
    }
  }
  return std::nullopt;
}

std::string_view to_string(Weekday d) { return kWeekdayNames[static_cast<std::size_t>(d)]; }

bool derive_label(int level) {
  if (level < kMinLevel || level > kMaxLevel) {
    throw ValidationError{"jam level " + std::to_string(level) + " outside 1..5"};
  }
  return level > 2;
}

TimeParts decompose_time(UtcMillis pub_date) {
  using namespace std::chrono;
  auto const utc = floor<seconds>(pub_date);
  auto const local = local_seconds{(utc + kPacificOffset).time_since_epoch()};
  auto const date = floor<days>(local);
  auto const ymd = year_month_day{date};
  auto const tod = hh_mm_ss{local - date};
  return TimeParts{
      .date_pst = local,
      .month = unsigned{ymd.month()},
      .day = unsigned{ymd.day()},
      .hour = static_cast<unsigned>(tod.hours().count()),
      .min = static_cast<unsigned>(tod.minutes().count()),
      .sec = static_cast<unsigned>(tod.seconds().count()),
      .weekday = static_cast<Weekday>(weekday{date}.iso_encoding() - 1),
  };
}

}  // namespace jamflow
