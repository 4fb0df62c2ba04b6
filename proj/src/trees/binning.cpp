#include "jamflow/trees/binning.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "jamflow/errors.hpp"

namespace jamflow::trees {

BinnedMatrix::BinnedMatrix(std::size_t n_rows, std::vector<std::vector<double>> cuts,
                           std::vector<BinIndex> bins)
    : n_rows_{n_rows}, cuts_{std::move(cuts)}, bins_{std::move(bins)} {
  if (bins_.size() != n_rows_ * cuts_.size()) {
    throw ValidationError{"binned matrix size does not match rows x features"};
  }
}

BinIndex BinnedMatrix::bin_of(std::size_t f, double value) const {
  if (is_missing(value)) {
    return missing_bin(f);
  }
  auto const& c = cuts_[f];
  return static_cast<BinIndex>(std::lower_bound(c.begin(), c.end(), value) - c.begin());
}

std::vector<double> quantile_cuts(std::vector<double> values, std::size_t max_bins) {
  std::erase_if(values, is_missing);
  if (values.empty()) {
    return {};
  }
  std::sort(values.begin(), values.end());
  std::vector<double> distinct;
  std::unique_copy(values.begin(), values.end(), std::back_inserter(distinct));
  if (distinct.size() <= max_bins) {
    distinct.pop_back();
    return distinct;
  }
  auto const n = values.size();
  auto const top = values.back();
  std::vector<double> cuts;
  for (std::size_t k = 1; k < max_bins; ++k) {
    auto const idx = k * n / max_bins;
    if (idx == 0) continue;
    auto const c = values[idx - 1];
    if (c < top && (cuts.empty() || c > cuts.back())) {
      cuts.push_back(c);
    }
  }
  return cuts;
}

BinnedMatrix quantize(FeatureMatrix const& matrix, std::size_t max_bins) {
  if (max_bins < 2) {
    throw ConfigError{"max_bins must be at least 2"};
  }
  if (max_bins > kMaxSupportedBins) {
    throw ConfigError{fmt::format("max_bins must not exceed {}", kMaxSupportedBins)};
  }
  auto const n = matrix.n_rows();
  if (n == 0) {
    throw ValidationError{"cannot quantize an empty matrix"};
  }
  auto const values = matrix.values();
  std::vector<std::vector<double>> cuts(matrix.n_features());
  std::vector<BinIndex> bins(n * matrix.n_features());
  std::vector<double> column(n);
  for (std::size_t f = 0; f != matrix.n_features(); ++f) {
    auto const col = values.col(static_cast<Eigen::Index>(f));
    for (std::size_t r = 0; r != n; ++r) {
      column[r] = col(static_cast<Eigen::Index>(r));
    }
    cuts[f] = quantile_cuts(column, max_bins);
    auto const& c = cuts[f];
    auto const missing = static_cast<BinIndex>(c.size() + 1);
    auto* out = bins.data() + f * n;
    for (std::size_t r = 0; r != n; ++r) {
      auto const v = column[r];
      out[r] = is_missing(v) ? missing
                             : static_cast<BinIndex>(std::lower_bound(c.begin(), c.end(), v) -
                                                     c.begin());
    }
  }
  return {n, std::move(cuts), std::move(bins)};
}

}  // namespace jamflow::trees
