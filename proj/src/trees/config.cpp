#include "jamflow/trees/config.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "jamflow/errors.hpp"
#include "jamflow/trees/binning.hpp"

namespace jamflow::trees {

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kRf: return "rf";
    case ModelKind::kGbt: return "gbt";
    case ModelKind::kXgb: return "xgb";
  }
  return "xgb";
}

std::optional<ModelKind> parse_model_kind(std::string_view s) {
  if (s == "rf") return ModelKind::kRf;
  if (s == "gbt") return ModelKind::kGbt;
  if (s == "xgb") return ModelKind::kXgb;
  return std::nullopt;
}

std::string_view display_name(ModelKind k) {
  switch (k) {
    case ModelKind::kRf: return "RF";
    case ModelKind::kGbt: return "GBT";
    case ModelKind::kXgb: return "XGBoost";
  }
  return "XGBoost";
}

void TrainConfig::validate() const {
  auto const fail = [](std::string const& msg) { throw ConfigError{msg}; };
  auto const in_unit = [](double x) { return x > 0.0 && x <= 1.0; };
  if (max_depth < 1) fail("max_depth must be at least 1");
  if (max_leaves < 1) fail("max_leaves must be at least 1");
  if (max_bins < 2 || max_bins > kMaxSupportedBins) {
    fail(fmt::format("max_bins must be in [2, {}]", kMaxSupportedBins));
  }
  if (n_workers < 1) fail("n_workers must be at least 1");
  if (n_partitions < 1) fail("n_partitions must be at least 1");
  if (!in_unit(learning_rate)) fail("learning_rate must be in (0, 1]");
  if (!in_unit(subsample_rows)) fail("subsample_rows must be in (0, 1]");
  if (!in_unit(subsample_features)) fail("subsample_features must be in (0, 1]");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be >= 0");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) fail("gamma must be >= 0");
  if (!(min_child_weight >= 0.0) || !std::isfinite(min_child_weight)) {
    fail("min_child_weight must be >= 0");
  }
}

SplitParams TrainConfig::split_params(ModelKind kind) const {
  return {lambda, gamma, min_child_weight,
          kind == ModelKind::kRf ? SplitCriterion::kGini : SplitCriterion::kSecondOrder};
}

}  // namespace jamflow::trees
