#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jamflow/ingest.hpp"

namespace jamflow::trees {

using BinIndex = std::uint16_t;

inline constexpr std::size_t kMaxSupportedBins = 4096;

/// Quantized features, stored column-major. For feature f, value bins are
/// 0..n_bins(f)-1 and the missing sentinel maps to missing_bin(f) == n_bins(f).
class BinnedMatrix {
public:
  BinnedMatrix() = default;
  BinnedMatrix(std::size_t n_rows, std::vector<std::vector<double>> cuts,
               std::vector<BinIndex> bins);

  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t n_features() const noexcept { return cuts_.size(); }
  std::size_t n_bins(std::size_t f) const noexcept { return cuts_[f].size() + 1; }
  BinIndex missing_bin(std::size_t f) const noexcept { return static_cast<BinIndex>(n_bins(f)); }

  /// Upper bound (inclusive) of each value bin except the last, strictly increasing.
  std::span<double const> cuts(std::size_t f) const noexcept { return cuts_[f]; }
  std::vector<std::vector<double>> const& all_cuts() const noexcept { return cuts_; }

  std::span<BinIndex const> column(std::size_t f) const noexcept {
    return {bins_.data() + f * n_rows_, n_rows_};
  }
  BinIndex bin(std::size_t row, std::size_t f) const noexcept { return bins_[f * n_rows_ + row]; }
  BinIndex bin_of(std::size_t f, double value) const;

private:
  std::size_t n_rows_{0};
  std::vector<std::vector<double>> cuts_;
  std::vector<BinIndex> bins_;
};

/// Cut points for one feature: the distinct values themselves when they fit in
/// max_bins, otherwise sorted[floor(k*n/max_bins) - 1] for k = 1..max_bins-1.
std::vector<double> quantile_cuts(std::vector<double> values, std::size_t max_bins);

/// Throws ConfigError if max_bins < 2 or exceeds kMaxSupportedBins, ValidationError if
/// the matrix has no rows.
BinnedMatrix quantize(FeatureMatrix const& matrix, std::size_t max_bins);

}  // namespace jamflow::trees
