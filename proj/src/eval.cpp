#include "jamflow/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "jamflow/datagen.hpp"
#include "jamflow/errors.hpp"
#include "jamflow/trees/model_io.hpp"

namespace jamflow::eval {

using nlohmann::ordered_json;
using trees::ModelKind;

SplitIndices split_indices(std::size_t n_rows, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError{"train fraction must lie strictly between 0 and 1"};
  }
  auto const n_train =
      static_cast<std::size_t>(std::floor(static_cast<double>(n_rows) * train_fraction));
  if (n_train == 0 || n_train == n_rows) {
    throw ValidationError{fmt::format("split of {} rows at {} leaves an empty side", n_rows,
                                      train_fraction)};
  }
  std::vector<std::size_t> perm(n_rows);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  SeededStream rng{seed};
  for (std::size_t i = n_rows - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.index(i + 1)]);
  }
  SplitIndices out;
  out.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

TrainTest split_train_test(FeatureMatrix const& matrix, double train_fraction,
                           std::uint64_t seed) {
  auto const idx = split_indices(matrix.n_rows(), train_fraction, seed);
  return {matrix.take_rows(idx.train), matrix.take_rows(idx.test)};
}

double auc(std::span<double const> scores, std::span<std::uint8_t const> labels) {
  if (scores.size() != labels.size()) {
    throw ValidationError{"scores and labels differ in length"};
  }
  auto const n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of (1-based, tie-averaged) ranks of the positives.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i != n;) {
    auto j = i;
    while (j != n && scores[order[j]] == scores[order[i]]) {
      ++j;
    }
    auto const avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (auto k = i; k != j; ++k) {
      if (labels[order[k]] != 0) {
        positive_rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j;
  }
  auto const negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw UndefinedMetricError{"AUC needs at least one positive and one negative label"};
  }
  auto const p = static_cast<double>(positives);
  auto const u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

void ConfusionMatrix::validate(std::optional<std::int64_t> expected_rows) const {
  if (tp < 0 || fp < 0 || tn < 0 || fn < 0) {
    throw ValidationError{"confusion matrix cells must be non-negative"};
  }
  if (expected_rows && total() != *expected_rows) {
    throw ValidationError{fmt::format("confusion matrix totals {} but the test set has {} rows",
                                      total(), *expected_rows)};
  }
}

ConfusionMatrix confusion(std::span<double const> scores, std::span<std::uint8_t const> labels,
                          double threshold) {
  if (scores.size() != labels.size()) {
    throw ValidationError{"scores and labels differ in length"};
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i != scores.size(); ++i) {
    auto const predicted = scores[i] >= threshold;
    auto const actual = labels[i] != 0;
    if (predicted) {
      ++(actual ? cm.tp : cm.fp);
    } else {
      ++(actual ? cm.fn : cm.tn);
    }
  }
  return cm;
}

PrecisionRecall precision_recall(ConfusionMatrix const& cm) {
  PrecisionRecall pr;
  if (cm.tp + cm.fp == 0) {
    pr.precision_degenerate = true;
  } else {
    pr.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
  }
  if (cm.tp + cm.fn == 0) {
    pr.recall_degenerate = true;
  } else {
    pr.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  }
  return pr;
}

namespace {

void score_into(EvalReport& report, std::span<double const> scores,
                std::span<std::uint8_t const> labels, double threshold) {
  report.confusion = confusion(scores, labels, threshold);
  report.confusion.validate(static_cast<std::int64_t>(labels.size()));
  report.pr = precision_recall(report.confusion);
  try {
    report.auc = auc(scores, labels);
  } catch (UndefinedMetricError const& e) {
    report.auc.reset();
    report.error = e.what();
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

EvalReport evaluate(trees::Ensemble const& model, FeatureMatrix const& test, double threshold,
                    std::size_t n_workers) {
  EvalReport report;
  report.kind = model.kind;
  report.feature_set = std::string{to_string(test.schema().feature_set)};
  report.config = model.config;
  report.n_workers = n_workers;
  report.n_test = test.n_rows();
  auto const scores = trees::predict(model, test, n_workers);
  score_into(report, scores, test.labels(), threshold);
  return report;
}

std::vector<EvalReport> bench(FeatureMatrix const& matrix, std::span<BenchConfig const> configs,
                              BenchOptions const& options) {
  std::vector<EvalReport> reports;
  if (configs.empty()) {
    return reports;
  }
  auto const split = split_train_test(matrix, options.train_fraction, options.split_seed);
  for (auto const& bc : configs) {
    EvalReport report;
    report.kind = bc.kind;
    report.feature_set = std::string{to_string(matrix.schema().feature_set)};
    report.config = bc.config;
    report.n_workers = bc.config.n_workers;
    report.n_train = split.train.n_rows();
    report.n_test = split.test.n_rows();
    try {
      auto const t0 = std::chrono::steady_clock::now();
      auto const model = trees::train(bc.kind, split.train, bc.config);
      report.train_seconds = seconds_since(t0);
      auto const t1 = std::chrono::steady_clock::now();
      auto const scores = trees::predict(model, split.test, bc.config.n_workers);
      report.predict_seconds = seconds_since(t1);
      score_into(report, scores, split.test.labels(), options.threshold);
    } catch (std::exception const& e) {
      report.error = e.what();
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

std::vector<ScalingRow> scaling_summary(std::span<EvalReport const> reports) {
  std::map<ModelKind, std::pair<EvalReport const*, EvalReport const*>> extremes;
  for (auto const& r : reports) {
    if (r.error && !r.auc) continue;
    auto& [lo, hi] = extremes[r.kind];
    if (lo == nullptr || r.n_workers < lo->n_workers) lo = &r;
    if (hi == nullptr || r.n_workers > hi->n_workers) hi = &r;
  }
  std::vector<ScalingRow> rows;
  for (auto const& [kind, ends] : extremes) {
    auto const [lo, hi] = ends;
    if (lo->n_workers == hi->n_workers) continue;
    rows.push_back({kind, lo->n_workers, hi->n_workers, lo->train_seconds, hi->train_seconds,
                    hi->train_seconds > 0.0 ? lo->train_seconds / hi->train_seconds : 0.0});
  }
  return rows;
}

ordered_json report_to_json(EvalReport const& r) {
  ordered_json j = {
      {"model", to_string(r.kind)},
      {"feature_set", r.feature_set},
      {"n_workers", r.n_workers},
      {"n_train", r.n_train},
      {"n_test", r.n_test},
      {"confusion", {{"tp", r.confusion.tp}, {"fp", r.confusion.fp},
                     {"tn", r.confusion.tn}, {"fn", r.confusion.fn}}},
      {"auc", r.auc ? ordered_json(*r.auc) : ordered_json(nullptr)},
      {"precision", r.pr.precision},
      {"recall", r.pr.recall},
      {"precision_degenerate", r.pr.precision_degenerate},
      {"recall_degenerate", r.pr.recall_degenerate},
      {"train_seconds", r.train_seconds},
      {"predict_seconds", r.predict_seconds},
      {"config", trees::config_to_json(r.config)},
  };
  if (r.error) {
    j["error"] = *r.error;
  }
  return j;
}

ordered_json scaling_to_json(std::span<ScalingRow const> rows) {
  ordered_json out = ordered_json::array();
  for (auto const& s : rows) {
    out.push_back({{"model", to_string(s.kind)},
                   {"base_workers", s.base_workers},
                   {"top_workers", s.top_workers},
                   {"base_train_seconds", s.base_seconds},
                   {"top_train_seconds", s.top_seconds},
                   {"speedup", s.speedup}});
  }
  return out;
}

std::string format_duration(double seconds) {
  auto const total = std::max(seconds, 0.0);
  auto const hours = static_cast<long>(total / 3600.0);
  auto const minutes = static_cast<long>((total - static_cast<double>(hours) * 3600.0) / 60.0);
  auto const secs = total - static_cast<double>(hours) * 3600.0 - static_cast<double>(minutes) * 60.0;
  if (hours > 0) return fmt::format("{} hrs {} min {:.0f} sec", hours, minutes, secs);
  if (minutes > 0) return fmt::format("{} min {:.1f} sec", minutes, secs);
  return fmt::format("{:.2f} sec", secs);
}

std::string render_table(std::span<EvalReport const> reports) {
  std::vector<std::string> headers;
  bool const mixed_workers =
      std::any_of(reports.begin(), reports.end(),
                  [&](EvalReport const& r) { return r.n_workers != reports.front().n_workers; });
  for (auto const& r : reports) {
    headers.push_back(mixed_workers
                          ? fmt::format("{} ({}w)", trees::display_name(r.kind), r.n_workers)
                          : std::string{trees::display_name(r.kind)});
  }
  auto const cell = [](EvalReport const& r, int row) -> std::string {
    if (r.error && !r.auc && row != 3) return "error";
    switch (row) {
      case 0: return r.auc ? fmt::format("{:.1f}%", 100.0 * *r.auc) : "n/a";
      case 1: return fmt::format("{:.3f}", r.pr.precision);
      case 2: return fmt::format("{:.3f}", r.pr.recall);
      default: return format_duration(r.train_seconds);
    }
  };
  std::size_t width = 12;
  for (auto const& h : headers) width = std::max(width, h.size() + 2);
  for (auto const& r : reports) {
    for (int row = 0; row != 4; ++row) width = std::max(width, cell(r, row).size() + 2);
  }
  std::string out = fmt::format("{:<16}", "");
  for (auto const& h : headers) out += fmt::format("{:<{}}", h, width);
  out += '\n';
  constexpr std::array<char const*, 4> kRows{"AUC", "Precision", "Recall", "Computing Time"};
  for (int row = 0; row != 4; ++row) {
    out += fmt::format("{:<16}", kRows[static_cast<std::size_t>(row)]);
    for (auto const& r : reports) out += fmt::format("{:<{}}", cell(r, row), width);
    out += '\n';
  }
  return out;
}

std::string render_csv(std::span<EvalReport const> reports) {
  std::string out =
      "model,feature_set,n_workers,n_train,n_test,auc,precision,recall,tp,fp,tn,fn,"
      "train_seconds,predict_seconds,error\n";
  for (auto const& r : reports) {
    auto error = r.error.value_or("");
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{:.6f},{:.6f},{}\n", to_string(r.kind),
                       r.feature_set, r.n_workers, r.n_train, r.n_test,
                       r.auc ? fmt::format("{}", *r.auc) : std::string{}, r.pr.precision,
                       r.pr.recall, r.confusion.tp, r.confusion.fp, r.confusion.tn,
                       r.confusion.fn, r.train_seconds, r.predict_seconds, error);
  }
  return out;
}

}  // namespace jamflow::eval
