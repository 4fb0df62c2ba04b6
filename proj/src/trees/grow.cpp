#include "jamflow/trees/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include <fmt/format.h>

#include "jamflow/datagen.hpp"
#include "jamflow/errors.hpp"

namespace jamflow::trees {

// ---------------------------------------------------------------------------
// DecisionTree

GrowOptions grow_options(TrainConfig const& config, ModelKind kind) {
  return {config.split_params(kind), config.max_depth, config.max_leaves,
          kind == ModelKind::kRf ? config.subsample_features : 1.0, config.seed};
}

std::size_t DecisionTree::n_leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](TreeNode const& n) { return n.is_leaf(); }));
}

int DecisionTree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i != nodes.size(); ++i) {
    auto const& n = nodes[i];
    if (!n.is_leaf()) {
      d[static_cast<std::size_t>(n.left)] = d[i] + 1;
      d[static_cast<std::size_t>(n.right)] = d[i] + 1;
    }
    deepest = std::max(deepest, d[i]);
  }
  return deepest;
}

std::size_t DecisionTree::leaf_for(std::span<double const> row) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    auto const& n = nodes[i];
    auto const v = row[n.feature];
    auto const left = is_missing(v) ? n.missing_goes_left : v <= n.threshold;
    i = static_cast<std::size_t>(left ? n.left : n.right);
  }
  return i;
}

std::size_t DecisionTree::leaf_for(BinnedMatrix const& binned, std::size_t row) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    auto const& n = nodes[i];
    auto const b = binned.bin(row, n.feature);
    auto const left = b == binned.missing_bin(n.feature) ? n.missing_goes_left
                                                          : b <= n.bin_threshold;
    i = static_cast<std::size_t>(left ? n.left : n.right);
  }
  return i;
}

// ---------------------------------------------------------------------------
// Growth

namespace {

struct Pending {
  std::size_t node;
  int depth;
  GradHistogram hist;
  std::optional<SplitCandidate> split;
};

double leaf_value(GradStats const& s, SplitParams const& p) {
  if (p.criterion == SplitCriterion::kGini) {
    return s.hess > 0.0 ? s.grad / s.hess : 0.0;
  }
  return s.hess + p.lambda > 0.0 ? leaf_weight(s.grad, s.hess, p.lambda) : 0.0;
}

}  // namespace

GrownTree grow(BinnedMatrix const& binned, std::span<double const> g, std::span<double const> h,
               GrowOptions const& options, PartitionedHistogramBuilder const& builder,
               std::span<std::uint32_t const> rows) {
  auto const n = binned.n_rows();
  if (g.size() != n || h.size() != n) {
    throw ValidationError{"gradient and hessian lengths must equal the number of rows"};
  }
  auto const nf = binned.n_features();
  auto const layout = std::make_shared<HistogramLayout const>(binned);

  GrownTree out;
  if (rows.empty()) {
    out.rows.resize(n);
    std::iota(out.rows.begin(), out.rows.end(), std::uint32_t{0});
  } else {
    out.rows.assign(rows.begin(), rows.end());
  }

  std::vector<GradStats> stats;
  auto& nodes = out.tree.nodes;
  auto& ranges = out.ranges;

  GradStats root;
  for (auto const r : out.rows) {
    root += GradStats{g[r], h[r], 1};
  }
  nodes.emplace_back();
  stats.push_back(root);
  ranges.push_back({0, out.rows.size()});

  // Per-node feature subsample, drawn in node creation order.
  SeededStream feature_rng{options.feature_seed};
  auto const n_sampled = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(options.subsample_features * static_cast<double>(nf))));
  std::vector<std::size_t> pool(nf);
  auto sample_features = [&]() -> std::vector<std::size_t> {
    if (n_sampled >= nf) {
      return {};
    }
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i != n_sampled; ++i) {
      std::swap(pool[i], pool[i + feature_rng.index(nf - i)]);
    }
    std::vector<std::size_t> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_sampled));
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  };

  auto find_split = [&](std::size_t node, int depth,
                        GradHistogram const& hist) -> std::optional<SplitCandidate> {
    auto const features = sample_features();
    if (depth >= options.max_depth || stats[node].count < 2 || nf == 0) {
      return std::nullopt;
    }
    return find_best_split(hist, stats[node], options.params, features);
  };

  std::vector<Pending> frontier;
  {
    auto hist = builder.build(binned, layout, out.rows, g, h);
    auto split = find_split(0, 0, hist);
    frontier.push_back({0, 0, std::move(hist), std::move(split)});
  }

  std::size_t leaves = 1;
  while (leaves < options.max_leaves) {
    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i != frontier.size(); ++i) {
      auto const& s = frontier[i].split;
      if (!s) continue;
      if (!pick || s->gain > frontier[*pick].split->gain +
                                 kGainRelTolerance * std::abs(frontier[*pick].split->gain)) {
        pick = i;
      }
    }
    if (!pick) {
      break;
    }
    auto parent = std::move(frontier[*pick]);
    frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(*pick));
    auto const& split = *parent.split;

    auto const f = split.feature;
    auto const missing = binned.missing_bin(f);
    auto const column = binned.column(f);
    auto const range = ranges[parent.node];
    auto const first = out.rows.begin() + static_cast<std::ptrdiff_t>(range.begin);
    auto const last = out.rows.begin() + static_cast<std::ptrdiff_t>(range.end);
    auto const mid = std::stable_partition(first, last, [&](std::uint32_t r) {
      auto const b = column[r];
      return b == missing ? split.missing_goes_left : b <= split.bin_threshold;
    });
    auto const split_at = static_cast<std::size_t>(mid - out.rows.begin());

    auto const left_id = nodes.size();
    auto const right_id = left_id + 1;
    {
      auto& p = nodes[parent.node];
      p.left = static_cast<std::int32_t>(left_id);
      p.right = static_cast<std::int32_t>(right_id);
      p.feature = static_cast<std::uint32_t>(f);
      p.bin_threshold = split.bin_threshold;
      p.threshold = binned.cuts(f)[split.bin_threshold];
      p.missing_goes_left = split.missing_goes_left;
      p.gain = split.gain;
    }
    nodes.emplace_back();
    nodes.emplace_back();
    stats.push_back(split.left);
    stats.push_back(split.right);
    ranges.push_back({range.begin, split_at});
    ranges.push_back({split_at, range.end});

    auto const rows_of = [&](std::size_t id) {
      return std::span<std::uint32_t const>{out.rows}.subspan(ranges[id].begin, ranges[id].size());
    };
    auto const build_left = ranges[left_id].size() <= ranges[right_id].size();
    auto small = builder.build(binned, layout, rows_of(build_left ? left_id : right_id), g, h);
    auto large = parent.hist - small;
    auto left_hist = build_left ? std::move(small) : std::move(large);
    auto right_hist = build_left ? std::move(large) : std::move(small);

    auto const depth = parent.depth + 1;
    auto left_split = find_split(left_id, depth, left_hist);
    auto right_split = find_split(right_id, depth, right_hist);
    frontier.push_back({left_id, depth, std::move(left_hist), std::move(left_split)});
    frontier.push_back({right_id, depth, std::move(right_hist), std::move(right_split)});
    ++leaves;
  }

  for (std::size_t i = 0; i != nodes.size(); ++i) {
    if (nodes[i].is_leaf()) {
      nodes[i].value = leaf_value(stats[i], options.params);
    }
  }
  return out;
}

DecisionTree grow_tree(BinnedMatrix const& binned, std::span<double const> g,
                       std::span<double const> h, TrainConfig const& config,
                       PartitionedHistogramBuilder const& builder) {
  return grow(binned, g, h, grow_options(config, ModelKind::kXgb), builder).tree;
}

}  // namespace jamflow::trees
