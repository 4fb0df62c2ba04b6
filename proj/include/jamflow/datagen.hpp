#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>

#include "jamflow/event_model.hpp"

namespace jamflow {

/// Portable random stream: std::mt19937_64 (bit-exact by the standard) with
/// conversions spelled out here rather than the implementation-defined std
/// distributions.
class SeededStream {
public:
  explicit SeededStream(std::uint64_t seed) : engine_{seed} {}

  std::uint64_t next() { return engine_(); }
  /// (x >> 11) * 2^-53, in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// floor(uniform() * n), in [0, n).
  std::size_t index(std::size_t n);
  /// Box-Muller, cosine branch; consumes exactly two uniforms.
  double normal();
  /// Inverse-CDF draw over non-negative weights (sum > 0); one uniform.
  std::size_t weighted(std::span<double const> weights);

private:
  std::mt19937_64 engine_;
};

struct GenConfig {
  std::size_t n_jams{0};
  std::size_t n_alerts{0};
  std::uint64_t seed{42};
  UtcMillis window_begin{default_window_begin()};
  UtcMillis window_end{default_window_end()};
  std::array<double, 5> level_weights{0.14, 0.20, 0.24, 0.24, 0.18};
  double coupling_noise{0.0};
  std::array<double, 4> event_weights{1.0, 1.0, 1.0, 1.0};

  static UtcMillis default_window_begin();
  static UtcMillis default_window_end();
  /// Throws ConfigError.
  void validate() const;
};

/// Per-level band midpoints for levels 1..5.
inline constexpr std::array<double, 5> kSpeedMidMph{60, 45, 30, 15, 3};
inline constexpr std::array<double, 5> kDelayMidSec{30, 90, 240, 600, 1500};
inline constexpr std::array<double, 5> kLengthMidM{200, 600, 1500, 3000, 6000};

struct StreetInfo {
  std::string_view name;
  std::string_view city;
  int road_type;
  double lon;
  double lat;
  double congestion;  // in [-1, 1]; tilts the level distribution
};

std::span<StreetInfo const> embedded_streets();

/// Writes exactly n_jams JSONL lines.
void generate_jams(GenConfig const& config, std::ostream& out);
/// Writes exactly n_alerts JSONL lines; uses a stream seeded with seed ^ kAlertSeedSalt.
void generate_alerts(GenConfig const& config, std::ostream& out);

std::string generate_jams(GenConfig const& config);
std::string generate_alerts(GenConfig const& config);

inline constexpr std::uint64_t kAlertSeedSalt = 0x9E3779B97F4A7C15ULL;

}  // namespace jamflow
