#pragma once

#include <span>
#include <string>
#include <vector>

#include "jamflow/ingest.hpp"
#include "jamflow/trees/tree.hpp"

namespace jamflow::trees {

double sigmoid(double margin);

struct GradHess {
  double g;
  double h;
};

/// Logistic loss derivatives w.r.t. the margin: p = sigmoid(margin), g = p - y, h = p(1 - p).
GradHess logistic_grad_hess(double margin, bool label);

/// What a model needs to know about the columns it was trained on.
struct ModelSchema {
  std::vector<std::string> feature_names;
  std::string fingerprint;
  FeatureSet feature_set{FeatureSet::kCustom};

  static ModelSchema of(FeatureSchema const& schema);

  friend bool operator==(ModelSchema const&, ModelSchema const&) = default;
};

struct Ensemble {
  ModelKind kind{ModelKind::kXgb};
  std::vector<DecisionTree> trees;
  double learning_rate{1.0};
  double base_margin{0.0};
  TrainConfig config;
  ModelSchema schema;
  std::vector<std::vector<double>> bin_edges;

  /// Boosting: base_margin + learning_rate * sum of leaf weights.
  double margin(std::span<double const> row) const;
  /// Probability of the positive class. Forests average per-tree positive fractions.
  double predict(std::span<double const> row) const;

  friend bool operator==(Ensemble const&, Ensemble const&) = default;
};

/// Throws ValidationError if the row width does not match the model.
double predict(Ensemble const& model, std::span<double const> row);
/// Throws ValidationError if the matrix schema fingerprint differs from the model's.
std::vector<double> predict(Ensemble const& model, FeatureMatrix const& matrix,
                            std::size_t n_workers = 1);

/// Training on an already quantized matrix. Deterministic in (inputs, config) and
/// independent of config.n_workers.
Ensemble train(ModelKind kind, BinnedMatrix const& binned, std::span<std::uint8_t const> labels,
               TrainConfig const& config, ModelSchema schema);

Ensemble train(ModelKind kind, FeatureMatrix const& matrix, TrainConfig const& config);
Ensemble train_xgb(FeatureMatrix const& matrix, TrainConfig const& config);
/// First-order boosting: h fixed to 1 per row.
Ensemble train_gbt(FeatureMatrix const& matrix, TrainConfig const& config);
/// Bagged Gini trees; prediction is the mean leaf positive fraction.
Ensemble train_rf(FeatureMatrix const& matrix, TrainConfig const& config);

}  // namespace jamflow::trees
