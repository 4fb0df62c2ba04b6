#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "jamflow/trees/histogram.hpp"

namespace jamflow::trees {

/// Second-order boosting gain, or Gini impurity decrease for random forests, where
/// grad carries the (weighted) positive count and hess the weighted row count.
enum class SplitCriterion : std::uint8_t { kSecondOrder, kGini };

struct SplitParams {
  double lambda{1.0};
  double gamma{0.0};
  double min_child_weight{1.0};
  SplitCriterion criterion{SplitCriterion::kSecondOrder};
};

/// Gains closer than this (relative) are ties; a gain must exceed this fraction of its
/// own score scale to count as positive.
inline constexpr double kGainRelTolerance = 1e-10;

struct SplitCandidate {
  std::size_t feature{0};
  BinIndex bin_threshold{0};  // rows with bin <= threshold go left
  double gain{0.0};
  GradStats left;
  GradStats right;
  bool missing_goes_left{true};
};

/// -G / (H + lambda). Throws DegenerateNodeError when H + lambda <= 0.
double leaf_weight(double grad, double hess, double lambda);

/// 1/2 [G_L^2/(H_L+l) + G_R^2/(H_R+l) - (G_L+G_R)^2/(H_L+H_R+l)] - gamma.
/// Throws DegenerateNodeError when any denominator is not positive.
double split_gain(GradStats const& left, GradStats const& right, double lambda, double gamma);

/// Weighted Gini impurity decrease minus gamma; grad = positives, hess = weight.
double gini_gain(GradStats const& left, GradStats const& right, double gamma);

/// Scans each feature's value bins left to right, trying both missing placements when
/// the node has missing rows, and returns the best valid split with positive gain.
/// Both children must keep a non-missing row and meet min_child_weight. Ties go to the
/// lowest feature, then lowest bin, then missing-left.
std::optional<SplitCandidate> find_best_split(GradHistogram const& hist, GradStats const& parent,
                                              SplitParams const& params,
                                              std::span<std::size_t const> features = {});

}  // namespace jamflow::trees
