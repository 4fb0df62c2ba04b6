#include "jamflow/trees/histogram.hpp"

#include <cstring>

#include "jamflow/errors.hpp"

namespace jamflow::trees {

HistogramLayout::HistogramLayout(BinnedMatrix const& binned) : offsets_{0} {
  for (std::size_t f = 0; f != binned.n_features(); ++f) {
    offsets_.push_back(offsets_.back() + binned.n_bins(f) + 1);
  }
}

HistogramLayout::HistogramLayout(std::vector<std::size_t> bins_per_feature) : offsets_{0} {
  for (auto const b : bins_per_feature) {
    offsets_.push_back(offsets_.back() + b + 1);
  }
}

GradHistogram GradHistogram::zeros(std::shared_ptr<HistogramLayout const> layout) {
  auto const n = static_cast<Eigen::Index>(layout->n_cells());
  return {std::move(layout), Eigen::ArrayXd::Zero(n), Eigen::ArrayXd::Zero(n),
          CountArray::Zero(n)};
}

bool GradHistogram::same_shape(GradHistogram const& other) const {
  return layout == other.layout || (layout && other.layout && *layout == *other.layout);
}

GradStats GradHistogram::cell(std::size_t f, std::size_t bin) const {
  auto const i = static_cast<Eigen::Index>(layout->offset(f) + bin);
  return {grad(i), hess(i), count(i)};
}

GradStats GradHistogram::feature_total(std::size_t f) const {
  GradStats s;
  for (std::size_t b = 0; b <= layout->n_bins(f); ++b) {
    s += cell(f, b);
  }
  return s;
}

GradHistogram& GradHistogram::operator+=(GradHistogram const& other) {
  if (!same_shape(other)) {
    throw ValidationError{"histogram shapes differ"};
  }
  grad += other.grad;
  hess += other.hess;
  count += other.count;
  return *this;
}

GradHistogram& GradHistogram::operator-=(GradHistogram const& other) {
  if (!same_shape(other)) {
    throw ValidationError{"histogram shapes differ"};
  }
  grad -= other.grad;
  hess -= other.hess;
  count -= other.count;
  return *this;
}

bool GradHistogram::bit_equal(GradHistogram const& other) const {
  auto const bytes_equal = [](auto const& a, auto const& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) *
                                               sizeof(typename std::decay_t<decltype(a)>::Scalar)) == 0;
  };
  return same_shape(other) && bytes_equal(grad, other.grad) && bytes_equal(hess, other.hess) &&
         bytes_equal(count, other.count);
}

GradHistogram build_histograms(BinnedMatrix const& binned,
                               std::shared_ptr<HistogramLayout const> const& layout,
                               std::span<std::uint32_t const> rows, std::span<double const> g,
                               std::span<double const> h) {
  auto hist = GradHistogram::zeros(layout);
  if (rows.empty()) {
    return hist;
  }
  std::vector<double> gs(rows.size());
  std::vector<double> hs(rows.size());
  for (std::size_t i = 0; i != rows.size(); ++i) {
    gs[i] = g[rows[i]];
    hs[i] = h[rows[i]];
  }
  double* grad = hist.grad.data();
  double* hess = hist.hess.data();
  std::int64_t* count = hist.count.data();
  for (std::size_t f = 0; f != binned.n_features(); ++f) {
    auto const col = binned.column(f).data();
    auto const off = layout->offset(f);
    for (std::size_t i = 0; i != rows.size(); ++i) {
      auto const cell = off + col[rows[i]];
      grad[cell] += gs[i];
      hess[cell] += hs[i];
      count[cell] += 1;
    }
  }
  return hist;
}

}  // namespace jamflow::trees
