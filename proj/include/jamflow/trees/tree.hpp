#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jamflow/parallel.hpp"
#include "jamflow/trees/binning.hpp"
#include "jamflow/trees/config.hpp"
#include "jamflow/trees/histogram.hpp"
#include "jamflow/trees/split.hpp"

namespace jamflow::trees {

struct TreeNode {
  std::int32_t left{-1};
  std::int32_t right{-1};
  std::uint32_t feature{0};
  BinIndex bin_threshold{0};
  double threshold{0.0};  // raw value; x <= threshold goes left
  bool missing_goes_left{true};
  double gain{0.0};
  double value{0.0};  // leaf output: boosting weight or forest positive fraction

  bool is_leaf() const noexcept { return left < 0; }
  friend bool operator==(TreeNode const&, TreeNode const&) = default;
};

/// Axis-aligned binary tree; node 0 is the root, children follow creation order.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  std::size_t n_leaves() const;
  int depth() const;
  std::size_t leaf_for(std::span<double const> row) const;
  std::size_t leaf_for(BinnedMatrix const& binned, std::size_t row) const;
  double predict(std::span<double const> row) const { return nodes[leaf_for(row)].value; }
  double predict(BinnedMatrix const& binned, std::size_t row) const {
    return nodes[leaf_for(binned, row)].value;
  }

  friend bool operator==(DecisionTree const&, DecisionTree const&) = default;
};

struct GrowOptions {
  SplitParams params;
  int max_depth{5};
  std::size_t max_leaves{256};
  double subsample_features{1.0};
  std::uint64_t feature_seed{0};
};

GrowOptions grow_options(TrainConfig const& config, ModelKind kind);

/// A grown tree plus the rows each node owns: node i holds rows[ranges[i]], ascending.
struct GrownTree {
  DecisionTree tree;
  std::vector<std::uint32_t> rows;
  std::vector<RowRange> ranges;
};

/// Best-first growth: the frontier node with the highest split gain expands next (ties
/// to the lowest node id) until no positive split remains, max_depth is reached or one
/// more split would exceed max_leaves. The smaller child's histogram is built; its
/// sibling is parent minus child. `rows` must be ascending; empty means all rows.
GrownTree grow(BinnedMatrix const& binned, std::span<double const> g, std::span<double const> h,
               GrowOptions const& options, PartitionedHistogramBuilder const& builder,
               std::span<std::uint32_t const> rows = {});

/// Second-order growth with leaf weights -G/(H+lambda).
DecisionTree grow_tree(BinnedMatrix const& binned, std::span<double const> g,
                       std::span<double const> h, TrainConfig const& config,
                       PartitionedHistogramBuilder const& builder);

}  // namespace jamflow::trees
