#include "jamflow/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "jamflow/errors.hpp"

namespace jamflow {

namespace {

constexpr std::array<StreetInfo, 24> kStreets{{
    {"I-405 N", "Los Angeles", 3, -118.4695, 34.0560, 0.9},
    {"I-405 S", "Los Angeles", 3, -118.4712, 34.0530, 0.8},
    {"US-101 N", "Los Angeles", 3, -118.3390, 34.1170, 0.7},
    {"US-101 S", "Los Angeles", 3, -118.3410, 34.1150, 0.6},
    {"I-10 E", "Los Angeles", 3, -118.3090, 34.0360, 0.8},
    {"I-10 W", "Santa Monica", 3, -118.4810, 34.0250, 0.5},
    {"I-5 N", "Burbank", 3, -118.3250, 34.1870, 0.4},
    {"I-110 S", "Los Angeles", 3, -118.2800, 33.9800, 0.5},
    {"I-710 S", "Long Beach", 3, -118.2050, 33.8500, 0.3},
    {"CA-134 E", "Glendale", 3, -118.2550, 34.1530, 0.2},
    {"Wilshire Blvd", "Los Angeles", 2, -118.3440, 34.0620, 0.3},
    {"Sunset Blvd", "Los Angeles", 2, -118.3590, 34.0980, 0.2},
    {"Santa Monica Blvd", "West Hollywood", 2, -118.3730, 34.0900, 0.1},
    {"Venice Blvd", "Los Angeles", 2, -118.4000, 34.0180, -0.1},
    {"Sepulveda Blvd", "Los Angeles", 2, -118.4480, 34.0050, 0.0},
    {"Ventura Blvd", "Sherman Oaks", 2, -118.4490, 34.1540, -0.1},
    {"Colorado Blvd", "Pasadena", 2, -118.1440, 34.1460, -0.3},
    {"Figueroa St", "Los Angeles", 1, -118.2680, 34.0410, -0.2},
    {"Main St", "Santa Monica", 1, -118.4840, 34.0000, -0.5},
    {"Pacific Coast Hwy", "Malibu", 6, -118.6800, 34.0360, -0.4},
    {"Hawthorne Blvd", "Torrance", 2, -118.3530, 33.8520, -0.6},
    {"Lakewood Blvd", "Long Beach", 2, -118.1440, 33.8400, -0.7},
    {"Glenoaks Blvd", "Burbank", 1, -118.3180, 34.1850, -0.8},
    {"Foothill Blvd", "La Canada Flintridge", 7, -118.2000, 34.2100, -0.9},
}};

constexpr std::array<std::array<std::string_view, 3>, 4> kDescriptions{{
    {"Road closed", "Closure due to construction", "Lane closed ahead"},
    {"Heavy traffic", "Stand-still traffic", "Slow traffic ahead"},
    {"Minor accident", "Major accident", "Car crash on shoulder"},
    {"Object on road", "Pothole", "Vehicle stopped on shoulder"},
}};

constexpr double kBandFraction = 0.4;
constexpr double kLocationJitterDeg = 0.02;

// Half-width of each level's band: kBandFraction of the gap to the nearest neighbour.
std::array<double, 5> half_widths(std::array<double, 5> const& mid) {
  std::array<double, 5> hw{};
  for (auto i = 0U; i != 5; ++i) {
    auto gap = std::numeric_limits<double>::infinity();
    if (i > 0) gap = std::min(gap, std::abs(mid[i] - mid[i - 1]));
    if (i < 4) gap = std::min(gap, std::abs(mid[i + 1] - mid[i]));
    hw[i] = kBandFraction * gap;
  }
  return hw;
}

double round_to(double v, double scale) { return std::round(v * scale) / scale; }

bool is_rush_hour(unsigned hour) { return (hour >= 7 && hour <= 9) || (hour >= 16 && hour <= 19); }

struct Placement {
  StreetInfo const* street;
  std::int64_t pub_ms;
  double lon;
  double lat;
};

Placement place(SeededStream& rng, GenConfig const& c) {
  auto const& street = kStreets[rng.index(kStreets.size())];
  auto const span = (c.window_end - c.window_begin).count();
  auto const offset = static_cast<std::int64_t>(std::floor(rng.uniform() * static_cast<double>(span)));
  auto const pub = c.window_begin.time_since_epoch().count() + std::min(offset, span - 1);
  auto const lon = street.lon + (2.0 * rng.uniform() - 1.0) * kLocationJitterDeg;
  auto const lat = street.lat + (2.0 * rng.uniform() - 1.0) * kLocationJitterDeg;
  return {&street, pub, round_to(lon, 1e6), round_to(lat, 1e6)};
}

}  // namespace

std::size_t SeededStream::index(std::size_t n) {
  return std::min(static_cast<std::size_t>(uniform() * static_cast<double>(n)), n - 1);
}

double SeededStream::normal() {
  auto const u1 = uniform();
  auto const u2 = uniform();
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t SeededStream::weighted(std::span<double const> weights) {
  auto const total = std::accumulate(weights.begin(), weights.end(), 0.0);
  auto const target = uniform() * total;
  auto acc = 0.0;
  auto last = weights.size() - 1;
  for (auto i = 0U; i != weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last = i;
    acc += weights[i];
    if (target < acc) return i;
  }
  return last;
}

std::span<StreetInfo const> embedded_streets() { return kStreets; }

UtcMillis GenConfig::default_window_begin() {
  using namespace std::chrono;
  return UtcMillis{sys_days{year{2017} / December / 31} - kPacificOffset};
}

UtcMillis GenConfig::default_window_end() {
  using namespace std::chrono;
  return UtcMillis{sys_days{year{2018} / January / 9} - kPacificOffset};
}

void GenConfig::validate() const {
  auto const check_weights = [](std::span<double const> w, char const* what) {
    if (std::any_of(w.begin(), w.end(), [](double x) { return !(x >= 0.0) || !std::isfinite(x); })) {
      throw ConfigError{fmt::format("{} must be finite and non-negative", what)};
    }
    if (!(std::accumulate(w.begin(), w.end(), 0.0) > 0.0)) {
      throw ConfigError{fmt::format("{} must not all be zero", what)};
    }
  };
  check_weights(level_weights, "level_weights");
  check_weights(event_weights, "event_weights");
  if (!(window_begin < window_end)) {
    throw ConfigError{"date window start must precede its end"};
  }
  if (window_begin.time_since_epoch().count() <= 0) {
    throw ConfigError{"date window must start after the epoch"};
  }
  if (!(coupling_noise >= 0.0) || !std::isfinite(coupling_noise)) {
    throw ConfigError{"coupling_noise must be finite and >= 0"};
  }
}

void generate_jams(GenConfig const& c, std::ostream& out) {
  c.validate();
  SeededStream rng{c.seed};
  auto const speed_hw = half_widths(kSpeedMidMph);
  auto const delay_hw = half_widths(kDelayMidSec);
  auto const length_hw = half_widths(kLengthMidM);

  fmt::memory_buffer buf;
  for (std::size_t i = 0; i != c.n_jams; ++i) {
    auto const at = place(rng, c);
    auto const hour = decompose_time(UtcMillis{std::chrono::milliseconds{at.pub_ms}}).hour;
    auto const tilt = (is_rush_hour(hour) ? 0.45 : -0.15) + 0.35 * at.street->congestion;
    std::array<double, 5> w{};
    for (auto l = 0U; l != 5; ++l) {
      w[l] = c.level_weights[l] * std::exp(tilt * (static_cast<double>(l) - 2.0));
    }
    auto const li = rng.weighted(w);

    auto const band = [&](std::array<double, 5> const& mid, std::array<double, 5> const& hw) {
      return mid[li] + (2.0 * rng.uniform() - 1.0) * hw[li];
    };
    auto speed = band(kSpeedMidMph, speed_hw);
    auto length = band(kLengthMidM, length_hw);
    auto delay = band(kDelayMidSec, delay_hw);
    speed += c.coupling_noise * kSpeedMidMph[li] * rng.normal();
    length += c.coupling_noise * kLengthMidM[li] * rng.normal();
    delay += c.coupling_noise * kDelayMidSec[li] * rng.normal();

    buf.clear();
    fmt::format_to(std::back_inserter(buf),
                   R"({{"location_x":{},"location_y":{},"street":"{}","city":"{}","country":"US",)"
                   R"("road_type":{},"pub_date":{},"level":{},"speed":{},"length":{},"delay":{}}})"
                   "\n",
                   at.lon, at.lat, at.street->name, at.street->city, at.street->road_type,
                   at.pub_ms, li + 1, round_to(std::max(speed, 0.0), 10.0),
                   std::round(std::max(length, 0.0)), std::round(std::max(delay, 0.0)));
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

void generate_alerts(GenConfig const& c, std::ostream& out) {
  c.validate();
  SeededStream rng{c.seed ^ kAlertSeedSalt};
  fmt::memory_buffer buf;
  for (std::size_t i = 0; i != c.n_alerts; ++i) {
    auto const at = place(rng, c);
    auto const type = rng.weighted(c.event_weights);
    auto const& descriptions = kDescriptions[type];
    auto const description = descriptions[rng.index(descriptions.size())];
    buf.clear();
    fmt::format_to(std::back_inserter(buf),
                   R"({{"location_x":{},"location_y":{},"street":"{}","city":"{}","country":"US",)"
                   R"("road_type":{},"report_description":"{}","type":"{}","pub_date":{}}})"
                   "\n",
                   at.lon, at.lat, at.street->name, at.street->city, at.street->road_type,
                   description, to_string(static_cast<EventType>(type)), at.pub_ms);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

std::string generate_jams(GenConfig const& config) {
  std::ostringstream out;
  generate_jams(config, out);
  return std::move(out).str();
}

std::string generate_alerts(GenConfig const& config) {
  std::ostringstream out;
  generate_alerts(config, out);
  return std::move(out).str();
}

}  // namespace jamflow
