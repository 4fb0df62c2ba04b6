#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "jamflow/trees/binning.hpp"

namespace jamflow::trees {

/// Summed gradients and hessians over a set of rows, with the row count.
struct GradStats {
  double grad{0.0};
  double hess{0.0};
  std::int64_t count{0};

  GradStats& operator+=(GradStats const& o) {
    grad += o.grad;
    hess += o.hess;
    count += o.count;
    return *this;
  }
  GradStats& operator-=(GradStats const& o) {
    grad -= o.grad;
    hess -= o.hess;
    count -= o.count;
    return *this;
  }
  friend GradStats operator+(GradStats a, GradStats const& b) { return a += b; }
  friend GradStats operator-(GradStats a, GradStats const& b) { return a -= b; }
  friend bool operator==(GradStats const&, GradStats const&) = default;
};

/// Cell offsets: feature f owns cells [offset(f), offset(f+1)); its last cell is the missing bin.
class HistogramLayout {
public:
  explicit HistogramLayout(BinnedMatrix const& binned);
  explicit HistogramLayout(std::vector<std::size_t> bins_per_feature);

  std::size_t n_features() const noexcept { return offsets_.size() - 1; }
  std::size_t n_cells() const noexcept { return offsets_.back(); }
  std::size_t offset(std::size_t f) const noexcept { return offsets_[f]; }
  /// Value bins of feature f (the missing cell excluded).
  std::size_t n_bins(std::size_t f) const noexcept { return offsets_[f + 1] - offsets_[f] - 1; }

  friend bool operator==(HistogramLayout const&, HistogramLayout const&) = default;

private:
  std::vector<std::size_t> offsets_;
};

using CountArray = Eigen::Array<std::int64_t, Eigen::Dynamic, 1>;

struct GradHistogram {
  std::shared_ptr<HistogramLayout const> layout;
  Eigen::ArrayXd grad;
  Eigen::ArrayXd hess;
  CountArray count;

  static GradHistogram zeros(std::shared_ptr<HistogramLayout const> layout);

  bool same_shape(GradHistogram const& other) const;
  GradStats cell(std::size_t f, std::size_t bin) const;
  GradStats missing(std::size_t f) const { return cell(f, layout->n_bins(f)); }
  /// Sum over all cells (value and missing) of feature f.
  GradStats feature_total(std::size_t f) const;

  GradHistogram& operator+=(GradHistogram const& other);
  GradHistogram& operator-=(GradHistogram const& other);

  bool bit_equal(GradHistogram const& other) const;
};

inline GradHistogram operator-(GradHistogram a, GradHistogram const& b) { return a -= b; }

/// Accumulates the stats of `rows` into a fresh histogram. Rows are visited in
/// the order given; callers pass ascending row ids so sums are reproducible.
GradHistogram build_histograms(BinnedMatrix const& binned,
                               std::shared_ptr<HistogramLayout const> const& layout,
                               std::span<std::uint32_t const> rows, std::span<double const> g,
                               std::span<double const> h);

}  // namespace jamflow::trees
