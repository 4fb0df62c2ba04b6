#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "jamflow/trees/split.hpp"

namespace jamflow::trees {

enum class ModelKind : std::uint8_t { kRf, kGbt, kXgb };

std::string_view to_string(ModelKind);
/// "rf", "gbt" or "xgb".
std::optional<ModelKind> parse_model_kind(std::string_view);
/// Column label used in comparison tables: RF, GBT, XGBoost.
std::string_view display_name(ModelKind);

struct TrainConfig {
  std::size_t n_trees{100};
  int max_depth{5};
  std::size_t max_leaves{256};
  double learning_rate{0.3};
  double lambda{1.0};
  double gamma{0.0};
  double min_child_weight{1.0};
  std::size_t max_bins{256};
  double subsample_rows{1.0};      // forest bagging fraction
  double subsample_features{1.0};  // per-node feature fraction (forest)
  bool bootstrap{true};            // forest rows drawn with replacement
  std::uint64_t seed{0};
  std::size_t n_workers{1};
  /// Row partitions for histogram building; fixed independently of n_workers so
  /// models do not depend on the degree of parallelism.
  std::size_t n_partitions{16};

  /// Throws ConfigError.
  void validate() const;
  SplitParams split_params(ModelKind kind) const;

  friend bool operator==(TrainConfig const&, TrainConfig const&) = default;
};

}  // namespace jamflow::trees
