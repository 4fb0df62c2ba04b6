#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gen.hpp"
#include "jamflow/errors.hpp"
#include "jamflow/parallel.hpp"
#include "jamflow/trees/binning.hpp"
#include "jamflow/trees/ensemble.hpp"
#include "jamflow/trees/model_io.hpp"
#include "oracles.hpp"
#include "tree_check.hpp"

namespace jamflow::trees {
namespace {

FeatureMatrix column_matrix(std::vector<double> const& xs) {
  FeatureSchema schema;
  schema.features.push_back({"x", FeatureKind::kNumeric, "x"});
  return {schema, xs, std::vector<std::uint8_t>(xs.size(), 0)};
}

// --- binning ---------------------------------------------------------------

TEST(QuantileCuts, DistinctValuesFitOneBinEach) {
  auto const cuts = quantile_cuts({3, 1, 2, 2, 3, 1}, 8);
  EXPECT_EQ(cuts, (std::vector<double>{1, 2}));
}

TEST(QuantileCuts, IgnoresMissingAndHandlesConstantColumns) {
  EXPECT_TRUE(quantile_cuts({5, 5, kMissing, 5}, 4).empty());
  EXPECT_TRUE(quantile_cuts({kMissing, kMissing}, 4).empty());
}

TEST(QuantileCuts, RespectsTheBinBudget) {
  std::vector<double> xs(1000);
  std::iota(xs.begin(), xs.end(), 0.0);
  auto const cuts = quantile_cuts(xs, 4);
  EXPECT_EQ(cuts, (std::vector<double>{249, 499, 749}));
}

TEST(Quantize, RejectsBadBinCountsAndEmptyInput) {
  auto const m = column_matrix({1, 2, 3});
  EXPECT_THROW(quantize(m, 1), ConfigError);
  EXPECT_THROW(quantize(m, kMaxSupportedBins + 1), ConfigError);
  EXPECT_THROW(quantize(column_matrix({}), 4), ValidationError);
}

TEST(QuantizeProperty, OrderPreservingWithStrictEdgesAndAReservedMissingBin) {
  for (std::uint64_t seed = 0; seed != 60; ++seed) {
    SCOPED_TRACE(seed);
    gen::Rng rng{seed};
    auto const data = gen::random_dataset(rng, rng.size(1, 400), rng.size(1, 3), 0.1);
    auto const m = data.matrix();
    auto const max_bins = rng.size(2, 64);
    auto const b = quantize(m, max_bins);
    for (std::size_t f = 0; f != m.n_features(); ++f) {
      auto const cuts = b.cuts(f);
      EXPECT_LE(cuts.size(), max_bins - 1);
      EXPECT_TRUE(std::adjacent_find(cuts.begin(), cuts.end(), std::greater_equal<>{}) == cuts.end());
      for (std::size_t r = 0; r != m.n_rows(); ++r) {
        auto const v = m.at(r, f);
        auto const bin = b.bin(r, f);
        EXPECT_EQ(bin, b.bin_of(f, v));
        if (is_missing(v)) {
          EXPECT_EQ(bin, b.missing_bin(f));
          continue;
        }
        EXPECT_LT(bin, b.n_bins(f));
        if (bin < cuts.size()) EXPECT_LE(v, cuts[bin]);
        if (bin > 0) EXPECT_GT(v, cuts[bin - 1]);
        for (std::size_t s = 0; s != m.n_rows(); ++s) {
          auto const w = m.at(s, f);
          if (!is_missing(w) && v <= w) EXPECT_LE(bin, b.bin(s, f));
        }
      }
    }
  }
}

// --- histograms and splits ---------------------------------------------------

TEST(Histogram, TotalsOverBinsEqualTotalsOverRows) {
  for (std::uint64_t seed = 0; seed != 30; ++seed) {
    SCOPED_TRACE(seed);
    gen::Rng rng{seed};
    auto const data = gen::random_dataset(rng, rng.size(1, 300), rng.size(1, 4), 0.2);
    auto const b = quantize(data.matrix(), 32);
    std::vector<double> g(data.n_rows);
    std::vector<double> h(data.n_rows);
    for (auto& v : g) v = rng.normal();
    for (auto& v : h) v = rng.real(0.0, 1.0);
    std::vector<std::uint32_t> rows;
    for (std::uint32_t r = 0; r != data.n_rows; ++r) {
      if (rng.chance(0.7)) rows.push_back(r);
    }
    auto const layout = std::make_shared<HistogramLayout const>(b);
    auto const hist = build_histograms(b, layout, rows, g, h);
    long double gs = 0;
    long double hs = 0;
    for (auto r : rows) {
      gs += g[r];
      hs += h[r];
    }
    for (std::size_t f = 0; f != b.n_features(); ++f) {
      auto const t = hist.feature_total(f);
      EXPECT_EQ(t.count, static_cast<std::int64_t>(rows.size()));
      EXPECT_NEAR(t.grad, static_cast<double>(gs), 1e-9);
      EXPECT_NEAR(t.hess, static_cast<double>(hs), 1e-9);
    }
    EXPECT_TRUE((hist.count >= 0).all());
  }
}

TEST(Histogram, SubtractionIsExactForDyadicGradients) {
  // Multiples of 1/8 with small magnitude add and subtract without rounding, so
  // parent - left must equal the directly built right histogram bit for bit.
  gen::Rng rng{7};
  auto const data = gen::random_dataset(rng, 500, 3, 0.1);
  auto const b = quantize(data.matrix(), 16);
  std::vector<double> g(500);
  std::vector<double> h(500);
  for (auto& v : g) v = static_cast<double>(rng.integer(-64, 64)) / 8.0;
  for (auto& v : h) v = static_cast<double>(rng.integer(0, 16)) / 8.0;
  std::vector<std::uint32_t> all(500);
  std::iota(all.begin(), all.end(), 0U);
  std::vector<std::uint32_t> left;
  std::vector<std::uint32_t> right;
  for (auto r : all) (rng.chance(0.4) ? left : right).push_back(r);
  auto const layout = std::make_shared<HistogramLayout const>(b);
  auto const parent = build_histograms(b, layout, all, g, h);
  auto const l = build_histograms(b, layout, left, g, h);
  auto const r = build_histograms(b, layout, right, g, h);
  EXPECT_TRUE((parent - l).bit_equal(r));
}

TEST(Split, GainAndLeafWeightFormulas) {
  GradStats const l{-2.0, 3.0, 3};
  GradStats const r{4.0, 1.0, 1};
  double const lambda = 1.0;
  double const expect = 0.5 * (4.0 / 4.0 + 16.0 / 2.0 - 4.0 / 5.0) - 0.25;
  EXPECT_DOUBLE_EQ(split_gain(l, r, lambda, 0.25), expect);
  EXPECT_DOUBLE_EQ(leaf_weight(-2.0, 3.0, 1.0), 0.5);
  EXPECT_THROW(leaf_weight(1.0, 0.0, 0.0), DegenerateNodeError);
  EXPECT_THROW(split_gain({1, 0, 1}, {1, 1, 1}, 0.0, 0.0), DegenerateNodeError);
}

TEST(Split, GiniGainIsImpurityDecrease) {
  // Pure children out of a 2/4 parent: 2*2*2/4 = 2.
  EXPECT_DOUBLE_EQ(gini_gain({2, 2, 2}, {0, 2, 2}, 0.0), 2.0);
  EXPECT_DOUBLE_EQ(gini_gain({1, 2, 2}, {1, 2, 2}, 0.0), 0.0);
  EXPECT_THROW(gini_gain({0, 0, 0}, {1, 2, 2}, 0.0), DegenerateNodeError);
}

TEST(Split, ExactTiesGoToTheLowestFeature) {
  // Two identical columns give identical gains.
  FeatureSchema schema;
  schema.features = {{"a", FeatureKind::kNumeric, "a"}, {"b", FeatureKind::kNumeric, "b"}};
  FeatureMatrix const m{schema, {0, 0, 1, 1, 2, 2, 3, 3}, {0, 0, 1, 1}};
  auto const b = quantize(m, 8);
  std::vector<double> const g{1, 1, -1, -1};
  std::vector<double> const h{1, 1, 1, 1};
  std::vector<std::uint32_t> const rows{0, 1, 2, 3};
  auto const layout = std::make_shared<HistogramLayout const>(b);
  auto const hist = build_histograms(b, layout, rows, g, h);
  auto const best = find_best_split(hist, {0, 4, 4}, {0.0, 0.0, 0.0});
  ASSERT_TRUE(best);
  EXPECT_EQ(best->feature, 0U);
  EXPECT_EQ(best->bin_threshold, 1);
}

TEST(Split, NoSplitWithoutPositiveGain) {
  auto const m = column_matrix({1, 2, 3, 4});
  auto const b = quantize(m, 8);
  std::vector<double> const g{1, 1, 1, 1};
  std::vector<double> const h{1, 1, 1, 1};
  std::vector<std::uint32_t> const rows{0, 1, 2, 3};
  auto const layout = std::make_shared<HistogramLayout const>(b);
  auto const hist = build_histograms(b, layout, rows, g, h);
  EXPECT_FALSE(find_best_split(hist, {4, 4, 4}, {1.0, 0.0, 0.0}));
}

// --- growth against the exact-greedy oracle ------------------------------------

TEST(GrowOracle, SecondOrderTreesMatchExactGreedy) {
  for (std::uint64_t seed = 1000; seed != 1200; ++seed) {
    SCOPED_TRACE(seed);
    auto const c = check::random_oracle_case(seed, false);
    auto const got = check::grow_case(c, 1, 4);
    auto const diff = check::same_tree(got.tree, check::oracle_tree(c), 1e-9);
    EXPECT_FALSE(diff) << *diff;
  }
}

TEST(GrowOracle, GiniTreesOverBootstrapWeightsMatchExactGreedy) {
  for (std::uint64_t seed = 2000; seed != 2100; ++seed) {
    SCOPED_TRACE(seed);
    auto const c = check::random_oracle_case(seed, true);
    auto const got = check::grow_case(c, 1, 4);
    auto const diff = check::same_tree(got.tree, check::oracle_tree(c), 1e-9);
    EXPECT_FALSE(diff) << *diff;
  }
}

TEST(Grow, RespectsDepthAndLeafBudgetsAndPartitionsRows) {
  for (std::uint64_t seed = 0; seed != 40; ++seed) {
    SCOPED_TRACE(seed);
    auto const c = check::random_oracle_case(seed, false);
    auto const grown = check::grow_case(c, 1, 3);
    auto const& t = grown.tree;
    EXPECT_LE(t.depth(), c.params.max_depth);
    EXPECT_LE(t.n_leaves(), c.params.max_leaves);
    EXPECT_EQ(t.nodes.size(), 2 * t.n_leaves() - 1);
    // Leaves partition the rows and each row's range agrees with tree routing.
    std::size_t covered = 0;
    auto const binned = quantize(c.data.matrix(), 256);
    for (std::size_t i = 0; i != t.nodes.size(); ++i) {
      if (!t.nodes[i].is_leaf()) continue;
      auto const range = grown.ranges[i];
      covered += range.size();
      for (auto k = range.begin; k != range.end; ++k) {
        auto const r = grown.rows[k];
        EXPECT_EQ(t.leaf_for(binned, r), i);
        EXPECT_EQ(t.leaf_for(c.data.rows[r]), i);
      }
    }
    EXPECT_EQ(covered, c.data.n_rows);
  }
}

TEST(Grow, IndependentOfWorkerCount) {
  for (std::uint64_t seed = 0; seed != 20; ++seed) {
    SCOPED_TRACE(seed);
    auto const c = check::random_oracle_case(seed, seed % 2 == 0);
    auto const one = check::grow_case(c, 1, 8).tree;
    for (std::size_t w : {2, 3, 8}) {
      EXPECT_EQ(check::grow_case(c, w, 8).tree, one);
    }
  }
}

// --- losses ------------------------------------------------------------------

TEST(Logistic, SigmoidMatchesQuadPrecision) {
  for (double m = -40.0; m <= 40.0; m += 0.37) {
    auto const want = oracle::sigmoid_q(m);
    EXPECT_NEAR(sigmoid(m), want, 4e-16 * want) << m;
  }
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
}

TEST(Logistic, GradHessMatchFiniteDifferences) {
  for (double m = -10.0; m <= 10.0; m += 0.125) {
    for (bool y : {false, true}) {
      auto const fd = oracle::logloss_central_differences(m, y, 1e-5);
      auto const gh = logistic_grad_hess(m, y);
      EXPECT_NEAR(gh.g, fd.first, 1e-6 * std::abs(fd.first)) << m << " " << y;
      EXPECT_NEAR(gh.h, fd.second, 1e-6 * std::abs(fd.second)) << m << " " << y;
    }
  }
}

// --- ensembles ---------------------------------------------------------------

FeatureMatrix separable(std::size_t n, std::uint64_t seed) {
  gen::Rng rng{seed};
  FeatureSchema schema;
  schema.features = {{"signal", FeatureKind::kNumeric, "s"}, {"noise", FeatureKind::kNumeric, "n"}};
  std::vector<double> values;
  std::vector<std::uint8_t> labels;
  for (std::size_t r = 0; r != n; ++r) {
    // 100 distinct values, so the class boundary falls on a bin edge.
    auto const s = static_cast<double>(rng.integer(0, 99)) / 100.0;
    values.push_back(s);
    values.push_back(rng.normal());
    labels.push_back(s > 0.4 ? 1 : 0);
  }
  return {schema, std::move(values), std::move(labels)};
}

TEST(Train, AllKindsSeparateASeparableProblem) {
  auto const m = separable(2000, 3);
  TrainConfig c;
  c.n_trees = 10;
  for (auto kind : {ModelKind::kRf, ModelKind::kGbt, ModelKind::kXgb}) {
    SCOPED_TRACE(to_string(kind));
    auto const model = train(kind, m, c);
    EXPECT_EQ(model.trees.size(), 10U);
    auto const p = predict(model, m, 1);
    std::size_t wrong = 0;
    for (std::size_t r = 0; r != m.n_rows(); ++r) {
      wrong += (p[r] >= 0.5) != (m.labels()[r] != 0);
    }
    EXPECT_EQ(wrong, 0U);
  }
}

TEST(Train, BoostingMarginIsBasePlusShrunkLeafSum) {
  auto const m = separable(500, 5);
  TrainConfig c;
  c.n_trees = 4;
  c.learning_rate = 0.1;
  auto const model = train_xgb(m, c);
  auto const rate = std::count(m.labels().begin(), m.labels().end(), 1) / 500.0;
  EXPECT_DOUBLE_EQ(model.base_margin, std::log(rate / (1 - rate)));
  for (std::size_t r = 0; r != 20; ++r) {
    double want = model.base_margin;
    for (auto const& t : model.trees) want += 0.1 * t.predict(m.row(r));
    EXPECT_DOUBLE_EQ(model.margin(m.row(r)), want);
    EXPECT_DOUBLE_EQ(predict(model, m.row(r)), sigmoid(want));
  }
}

TEST(Train, GbtFirstTreeUsesUnitHessians) {
  // With h = 1 an unsplit root is -sum(g) / (n + lambda); a huge gamma blocks splits.
  auto const m = separable(300, 9);
  TrainConfig c;
  c.n_trees = 1;
  c.gamma = 1e9;
  auto const model = train_gbt(m, c);
  double g = 0;
  for (auto l : m.labels()) g += logistic_grad_hess(model.base_margin, l != 0).g;
  EXPECT_NEAR(model.trees[0].nodes[0].value, -g / (300 + 1.0), 1e-12);
}

TEST(Train, ForestPredictionsAreMeanLeafFractions) {
  auto const m = separable(400, 11);
  TrainConfig c;
  c.n_trees = 5;
  c.subsample_features = 0.5;
  auto const model = train_rf(m, c);
  for (std::size_t r = 0; r != 10; ++r) {
    double sum = 0;
    for (auto const& t : model.trees) {
      auto const v = t.predict(m.row(r));
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      sum += v;
    }
    EXPECT_DOUBLE_EQ(model.predict(m.row(r)), sum / 5.0);
  }
}

TEST(Train, ModelsAreIdenticalAcrossWorkerCounts) {
  gen::Rng rng{21};
  auto const data = gen::random_dataset(rng, 3000, 4, 0.05);
  auto const m = data.matrix();
  for (auto kind : {ModelKind::kRf, ModelKind::kGbt, ModelKind::kXgb}) {
    SCOPED_TRACE(to_string(kind));
    TrainConfig c;
    c.n_trees = 5;
    c.subsample_features = 0.5;
    c.n_workers = 1;
    auto const base = serialize_model(train(kind, m, c));
    for (std::size_t w : {2, 4, 8}) {
      c.n_workers = w;
      EXPECT_EQ(serialize_model(train(kind, m, c)), base);
    }
  }
}

TEST(Train, SeedChangesForestsOnly) {
  auto const m = separable(500, 13);
  TrainConfig a;
  a.n_trees = 3;
  auto b = a;
  b.seed = 99;
  EXPECT_NE(train_rf(m, a).trees, train_rf(m, b).trees);
  EXPECT_EQ(train_xgb(m, a).trees, train_xgb(m, b).trees);
}

TEST(Train, ValidatesConfiguration) {
  auto const m = separable(10, 1);
  TrainConfig c;
  c.max_depth = -1;
  EXPECT_THROW(train_xgb(m, c), ConfigError);
  c = {};
  c.n_workers = 0;
  EXPECT_THROW(train_xgb(m, c), ConfigError);
  c = {};
  c.learning_rate = 0.0;
  EXPECT_THROW(train_xgb(m, c), ConfigError);
}

TEST(Predict, RejectsMismatchedSchemas) {
  auto const m = separable(50, 1);
  TrainConfig c;
  c.n_trees = 1;
  auto const model = train_xgb(m, c);
  EXPECT_THROW(predict(model, std::vector<double>{1.0}), ValidationError);
  FeatureSchema other;
  other.features = {{"x", FeatureKind::kNumeric, "x"}, {"y", FeatureKind::kNumeric, "y"}};
  FeatureMatrix const wrong{other, std::vector<double>(100, 0.0), std::vector<std::uint8_t>(50, 0)};
  EXPECT_THROW(predict(model, wrong), ValidationError);
}

TEST(ModelIo, RoundTripsExactly) {
  gen::Rng rng{33};
  auto const m = gen::random_dataset(rng, 400, 3, 0.1).matrix();
  for (auto kind : {ModelKind::kRf, ModelKind::kGbt, ModelKind::kXgb}) {
    TrainConfig c;
    c.n_trees = 3;
    auto const model = train(kind, m, c);
    auto const text = serialize_model(model, "model.json.manifest.json");
    auto const back = model_from_json(nlohmann::json::parse(text));
    EXPECT_EQ(back, model);
    EXPECT_EQ(serialize_model(back, "model.json.manifest.json"), text);
  }
}

TEST(ModelIo, EchoesDepthAndLeafSettings) {
  auto const m = separable(100, 2);
  TrainConfig c;
  c.n_trees = 1;
  c.max_depth = 5;
  c.max_leaves = 256;
  auto const j = nlohmann::json::parse(serialize_model(train_xgb(m, c)));
  EXPECT_EQ(j["config"]["max_depth"], 5);
  EXPECT_EQ(j["config"]["max_leaves"], 256);
  EXPECT_FALSE(j["config"].contains("n_workers"));
}

TEST(ModelIo, RejectsMalformedModels) {
  auto const m = separable(100, 2);
  TrainConfig c;
  c.n_trees = 1;
  auto j = nlohmann::json::parse(serialize_model(train_xgb(m, c)));
  auto bad = j;
  bad["format"] = "other";
  EXPECT_THROW(model_from_json(bad), ValidationError);
  bad = j;
  bad["trees"][0]["nodes"][0]["left"] = 0;
  EXPECT_THROW(model_from_json(bad), ValidationError);
}

}  // namespace
}  // namespace jamflow::trees
