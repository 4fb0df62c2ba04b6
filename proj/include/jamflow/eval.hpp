#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "jamflow/ingest.hpp"
#include "jamflow/trees/ensemble.hpp"

namespace jamflow::eval {

struct SplitIndices {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

/// Seeded Fisher-Yates permutation; the first floor(n * train_fraction) positions are
/// the training rows. Throws ValidationError when either side would be empty.
SplitIndices split_indices(std::size_t n_rows, double train_fraction, std::uint64_t seed);

struct TrainTest {
  FeatureMatrix train;
  FeatureMatrix test;
};

TrainTest split_train_test(FeatureMatrix const& matrix, double train_fraction, std::uint64_t seed);

/// Mann-Whitney statistic with ties counted one half. Throws UndefinedMetricError
/// unless both classes are present.
double auc(std::span<double const> scores, std::span<std::uint8_t const> labels);

struct ConfusionMatrix {
  std::int64_t tp{0};
  std::int64_t fp{0};
  std::int64_t tn{0};
  std::int64_t fn{0};

  std::int64_t total() const noexcept { return tp + fp + tn + fn; }
  /// Throws ValidationError on negative cells or a total other than `expected_rows`.
  void validate(std::optional<std::int64_t> expected_rows = std::nullopt) const;

  friend bool operator==(ConfusionMatrix const&, ConfusionMatrix const&) = default;
};

inline constexpr double kDefaultThreshold = 0.5;

/// Predicted positive iff score >= threshold.
ConfusionMatrix confusion(std::span<double const> scores, std::span<std::uint8_t const> labels,
                          double threshold = kDefaultThreshold);

struct PrecisionRecall {
  double precision{0.0};
  double recall{0.0};
  bool precision_degenerate{false};  // tp + fp == 0, precision reported as 0
  bool recall_degenerate{false};     // tp + fn == 0, recall reported as 0
};

PrecisionRecall precision_recall(ConfusionMatrix const& cm);

struct BenchConfig {
  trees::ModelKind kind{trees::ModelKind::kXgb};
  trees::TrainConfig config;
};

struct EvalReport {
  trees::ModelKind kind{trees::ModelKind::kXgb};
  std::string feature_set;
  ConfusionMatrix confusion;
  std::optional<double> auc;
  PrecisionRecall pr;
  double train_seconds{0.0};
  double predict_seconds{0.0};
  std::size_t n_workers{1};
  std::size_t n_train{0};
  std::size_t n_test{0};
  trees::TrainConfig config;
  std::optional<std::string> error;
};

/// Scores a trained model on `test` (metrics only; timings left at zero).
EvalReport evaluate(trees::Ensemble const& model, FeatureMatrix const& test,
                    double threshold = kDefaultThreshold, std::size_t n_workers = 1);

struct BenchOptions {
  double train_fraction{0.75};
  std::uint64_t split_seed{42};
  double threshold{kDefaultThreshold};
};

/// Splits once, then trains and scores each config, timing training and prediction
/// with a monotonic clock. Configs run sequentially; a failing config yields
/// a report with `error` set and the rest still run.
std::vector<EvalReport> bench(FeatureMatrix const& matrix, std::span<BenchConfig const> configs,
                              BenchOptions const& options = {});

struct ScalingRow {
  trees::ModelKind kind;
  std::size_t base_workers;
  std::size_t top_workers;
  double base_seconds;
  double top_seconds;
  double speedup;  // base_seconds / top_seconds
};

/// Per model kind: training time at the fewest vs the most workers among the reports.
std::vector<ScalingRow> scaling_summary(std::span<EvalReport const> reports);

nlohmann::ordered_json report_to_json(EvalReport const& report);
nlohmann::ordered_json scaling_to_json(std::span<ScalingRow const> rows);

/// AUC / Precision / Recall / Computing Time rows, one column per report.
std::string render_table(std::span<EvalReport const> reports);
std::string render_csv(std::span<EvalReport const> reports);
std::string format_duration(double seconds);

}  // namespace jamflow::eval
