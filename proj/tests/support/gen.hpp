#pragma once

// Small hand-rolled generators for property tests. Every case draws from its own
// seeded engine so a failure message naming the seed reproduces it.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "jamflow/ingest.hpp"

namespace gen {

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_{seed} {}

  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>{lo, hi}(engine_);
  }
  std::size_t size(std::size_t lo, std::size_t hi) {
    return static_cast<std::size_t>(integer(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
  }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>{lo, hi}(engine_); }
  double normal() { return std::normal_distribution<double>{}(engine_); }
  bool chance(double p) { return real(0.0, 1.0) < p; }
  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
};

/// A small dense dataset: row-major values (NaN = missing) plus binary labels.
struct Dataset {
  std::size_t n_rows{0};
  std::size_t n_features{0};
  std::vector<std::vector<double>> rows;
  std::vector<std::uint8_t> labels;

  jamflow::FeatureMatrix matrix() const {
    jamflow::FeatureSchema schema;
    for (std::size_t f = 0; f != n_features; ++f) {
      schema.features.push_back({"f" + std::to_string(f), jamflow::FeatureKind::kNumeric, "f"});
    }
    std::vector<double> values;
    values.reserve(n_rows * n_features);
    for (auto const& r : rows) values.insert(values.end(), r.begin(), r.end());
    return {schema, std::move(values), labels};
  }
};

/// Columns mix coarse integer grids (many ties), continuous values and missing cells.
inline Dataset random_dataset(Rng& rng, std::size_t n_rows, std::size_t n_features,
                              double missing_rate) {
  Dataset d;
  d.n_rows = n_rows;
  d.n_features = n_features;
  std::vector<int> grid(n_features);
  for (auto& g : grid) g = rng.chance(0.5) ? static_cast<int>(rng.integer(2, 12)) : 0;
  d.rows.assign(n_rows, std::vector<double>(n_features));
  for (std::size_t r = 0; r != n_rows; ++r) {
    for (std::size_t f = 0; f != n_features; ++f) {
      if (rng.chance(missing_rate)) {
        d.rows[r][f] = std::numeric_limits<double>::quiet_NaN();
      } else if (grid[f] > 0) {
        d.rows[r][f] = static_cast<double>(rng.integer(0, grid[f] - 1));
      } else {
        d.rows[r][f] = rng.normal() * 10.0;
      }
    }
    d.labels.push_back(static_cast<std::uint8_t>(rng.chance(0.5)));
  }
  return d;
}

}  // namespace gen
