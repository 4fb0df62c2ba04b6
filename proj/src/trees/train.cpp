#include "jamflow/trees/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "jamflow/datagen.hpp"
#include "jamflow/errors.hpp"

namespace jamflow::trees {

namespace {

constexpr double kMinBaseRate = 1e-6;

// Contiguous chunks for per-row work; the per-row results do not depend on chunking.
void for_rows(WorkerPool& pool, std::size_t n, auto&& fn) {
  auto const chunks = std::min<std::size_t>(pool.size() * 4, std::max<std::size_t>(n / 4096, 1));
  auto const plan = partition_rows(n, chunks);
  pool.parallel_for(plan.n_parts(), [&](std::size_t c) {
    for (auto r = plan.ranges[c].begin; r != plan.ranges[c].end; ++r) {
      fn(r);
    }
  });
}

Ensemble train_boosted(ModelKind kind, BinnedMatrix const& binned,
                       std::span<std::uint8_t const> labels, TrainConfig const& config,
                       WorkerPool& pool, PartitionedHistogramBuilder const& builder) {
  auto const n = binned.n_rows();
  auto const positives = std::count(labels.begin(), labels.end(), std::uint8_t{1});
  auto const rate = std::clamp(static_cast<double>(positives) / static_cast<double>(n),
                               kMinBaseRate, 1.0 - kMinBaseRate);

  Ensemble model;
  model.kind = kind;
  model.learning_rate = config.learning_rate;
  model.base_margin = std::log(rate / (1.0 - rate));

  std::vector<double> margins(n, model.base_margin);
  std::vector<double> g(n);
  std::vector<double> h(n, 1.0);
  auto const options = grow_options(config, kind);
  for (std::size_t t = 0; t != config.n_trees; ++t) {
    for_rows(pool, n, [&](std::size_t r) {
      auto const gh = logistic_grad_hess(margins[r], labels[r] != 0);
      g[r] = gh.g;
      if (kind == ModelKind::kXgb) {
        h[r] = gh.h;
      }
    });
    auto grown = grow(binned, g, h, options, builder);
    auto const& nodes = grown.tree.nodes;
    pool.parallel_for(nodes.size(), [&](std::size_t i) {
      if (!nodes[i].is_leaf()) return;
      auto const step = config.learning_rate * nodes[i].value;
      for (auto k = grown.ranges[i].begin; k != grown.ranges[i].end; ++k) {
        margins[grown.rows[k]] += step;
      }
    });
    model.trees.push_back(std::move(grown.tree));
  }
  return model;
}

Ensemble train_forest(BinnedMatrix const& binned, std::span<std::uint8_t const> labels,
                      TrainConfig const& config, PartitionedHistogramBuilder const& builder) {
  auto const n = binned.n_rows();
  Ensemble model;
  model.kind = ModelKind::kRf;
  model.learning_rate = 1.0;
  model.base_margin = 0.0;

  auto const draws = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(config.subsample_rows * static_cast<double>(n))));
  std::vector<double> weight(n);
  std::vector<double> positive(n);
  std::vector<std::uint32_t> in_bag;
  std::vector<std::uint32_t> order(n);
  for (std::size_t t = 0; t != config.n_trees; ++t) {
    // Row sample stream and node feature stream are both derived from (seed, tree).
    SeededStream rows_rng{config.seed + 2 * t};
    std::fill(weight.begin(), weight.end(), 0.0);
    if (config.bootstrap) {
      for (std::size_t d = 0; d != draws; ++d) {
        weight[rows_rng.index(n)] += 1.0;
      }
    } else if (draws >= n) {
      std::fill(weight.begin(), weight.end(), 1.0);
    } else {
      std::iota(order.begin(), order.end(), std::uint32_t{0});
      for (std::size_t i = 0; i != draws; ++i) {
        std::swap(order[i], order[i + rows_rng.index(n - i)]);
        weight[order[i]] = 1.0;
      }
    }
    in_bag.clear();
    for (std::size_t r = 0; r != n; ++r) {
      positive[r] = labels[r] != 0 ? weight[r] : 0.0;
      if (weight[r] > 0.0) {
        in_bag.push_back(static_cast<std::uint32_t>(r));
      }
    }
    auto options = grow_options(config, ModelKind::kRf);
    options.feature_seed = config.seed + 2 * t + 1;
    model.trees.push_back(grow(binned, positive, weight, options, builder, in_bag).tree);
  }
  return model;
}

}  // namespace

double sigmoid(double margin) {
  if (margin >= 0.0) {
    return 1.0 / (1.0 + std::exp(-margin));
  }
  auto const e = std::exp(margin);
  return e / (1.0 + e);
}

GradHess logistic_grad_hess(double margin, bool label) {
  // p - 1 == -sigmoid(-margin); the latter keeps full relative precision for large margins.
  auto const p = sigmoid(margin);
  auto const q = sigmoid(-margin);
  return {label ? -q : p, p * q};
}

ModelSchema ModelSchema::of(FeatureSchema const& schema) {
  ModelSchema s;
  for (auto const& f : schema.features) {
    s.feature_names.push_back(f.name);
  }
  s.fingerprint = schema.fingerprint();
  s.feature_set = schema.feature_set;
  return s;
}

double Ensemble::margin(std::span<double const> row) const {
  auto m = base_margin;
  for (auto const& t : trees) {
    m += learning_rate * t.predict(row);
  }
  return m;
}

double Ensemble::predict(std::span<double const> row) const {
  if (kind == ModelKind::kRf) {
    if (trees.empty()) {
      return 0.5;
    }
    auto sum = 0.0;
    for (auto const& t : trees) {
      sum += t.predict(row);
    }
    return sum / static_cast<double>(trees.size());
  }
  return sigmoid(margin(row));
}

double predict(Ensemble const& model, std::span<double const> row) {
  if (row.size() != model.schema.feature_names.size()) {
    throw ValidationError{"row has " + std::to_string(row.size()) + " features, model expects " +
                          std::to_string(model.schema.feature_names.size())};
  }
  return model.predict(row);
}

std::vector<double> predict(Ensemble const& model, FeatureMatrix const& matrix,
                            std::size_t n_workers) {
  if (matrix.schema().fingerprint() != model.schema.fingerprint) {
    throw ValidationError{"matrix schema fingerprint " + matrix.schema().fingerprint() +
                          " does not match model fingerprint " + model.schema.fingerprint};
  }
  std::vector<double> out(matrix.n_rows());
  WorkerPool pool{n_workers};
  for_rows(pool, matrix.n_rows(), [&](std::size_t r) { out[r] = model.predict(matrix.row(r)); });
  return out;
}

Ensemble train(ModelKind kind, BinnedMatrix const& binned, std::span<std::uint8_t const> labels,
               TrainConfig const& config, ModelSchema schema) {
  config.validate();
  if (labels.size() != binned.n_rows()) {
    throw ValidationError{"label count does not match the number of rows"};
  }
  if (binned.n_rows() == 0) {
    throw ValidationError{"cannot train on an empty matrix"};
  }
  if (binned.n_rows() > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError{"row count exceeds the 32-bit row index range"};
  }
  WorkerPool pool{config.n_workers};
  PartitionedHistogramBuilder builder{partition_rows(binned.n_rows(), config.n_partitions), pool};
  auto model = kind == ModelKind::kRf ? train_forest(binned, labels, config, builder)
                                      : train_boosted(kind, binned, labels, config, pool, builder);
  model.config = config;
  // Execution setting only; models compare equal across worker counts.
  model.config.n_workers = TrainConfig{}.n_workers;
  model.schema = std::move(schema);
  model.bin_edges = binned.all_cuts();
  return model;
}

Ensemble train(ModelKind kind, FeatureMatrix const& matrix, TrainConfig const& config) {
  config.validate();
  auto const binned = quantize(matrix, config.max_bins);
  return train(kind, binned, matrix.labels(), config, ModelSchema::of(matrix.schema()));
}

Ensemble train_xgb(FeatureMatrix const& matrix, TrainConfig const& config) {
  return train(ModelKind::kXgb, matrix, config);
}

Ensemble train_gbt(FeatureMatrix const& matrix, TrainConfig const& config) {
  return train(ModelKind::kGbt, matrix, config);
}

Ensemble train_rf(FeatureMatrix const& matrix, TrainConfig const& config) {
  return train(ModelKind::kRf, matrix, config);
}

}  // namespace jamflow::trees
