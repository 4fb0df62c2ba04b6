#include "jamflow/trees/split.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "jamflow/errors.hpp"

namespace jamflow::trees {

namespace {

double score(double grad, double hess, double lambda) { return grad * grad / (hess + lambda); }

// Twice the weighted Gini impurity mass: 2 P (N - P) / N.
double impurity(GradStats const& s) {
  return s.hess > 0.0 ? 2.0 * s.grad * (s.hess - s.grad) / s.hess : 0.0;
}

struct Scored {
  double gain;
  double scale;
};

std::optional<Scored> evaluate(GradStats const& left, GradStats const& right,
                               SplitParams const& p) {
  if (left.hess < p.min_child_weight || right.hess < p.min_child_weight) {
    return std::nullopt;
  }
  if (p.criterion == SplitCriterion::kGini) {
    if (!(left.hess > 0.0) || !(right.hess > 0.0)) {
      return std::nullopt;
    }
    auto const parent = impurity(left + right);
    return Scored{parent - impurity(left) - impurity(right) - p.gamma, parent};
  }
  if (!(left.hess + p.lambda > 0.0) || !(right.hess + p.lambda > 0.0)) {
    return std::nullopt;
  }
  auto const sl = score(left.grad, left.hess, p.lambda);
  auto const sr = score(right.grad, right.hess, p.lambda);
  auto const sp = score(left.grad + right.grad, left.hess + right.hess, p.lambda);
  return Scored{0.5 * (sl + sr - sp) - p.gamma, 0.5 * (sl + sr + sp)};
}

}  // namespace

double leaf_weight(double grad, double hess, double lambda) {
  if (!(hess + lambda > 0.0)) {
    throw DegenerateNodeError{"leaf hessian plus lambda must be positive"};
  }
  return -grad / (hess + lambda);
}

double split_gain(GradStats const& left, GradStats const& right, double lambda, double gamma) {
  auto const parent_h = left.hess + right.hess + lambda;
  if (!(left.hess + lambda > 0.0) || !(right.hess + lambda > 0.0) || !(parent_h > 0.0)) {
    throw DegenerateNodeError{"split child hessian plus lambda must be positive"};
  }
  return 0.5 * (score(left.grad, left.hess, lambda) + score(right.grad, right.hess, lambda) -
                score(left.grad + right.grad, left.hess + right.hess, lambda)) -
         gamma;
}

double gini_gain(GradStats const& left, GradStats const& right, double gamma) {
  if (!(left.hess > 0.0) || !(right.hess > 0.0)) {
    throw DegenerateNodeError{"gini split children must carry positive weight"};
  }
  return impurity(left + right) - impurity(left) - impurity(right) - gamma;
}

std::optional<SplitCandidate> find_best_split(GradHistogram const& hist, GradStats const& parent,
                                              SplitParams const& params,
                                              std::span<std::size_t const> features) {
  auto const& layout = *hist.layout;
  std::vector<std::size_t> all;
  if (features.empty()) {
    all.resize(layout.n_features());
    std::iota(all.begin(), all.end(), std::size_t{0});
    features = all;
  }

  std::optional<SplitCandidate> best;
  auto consider = [&](std::size_t f, std::size_t b, GradStats const& left,
                      GradStats const& right, bool missing_left) {
    auto const s = evaluate(left, right, params);
    if (!s || !(s->gain > kGainRelTolerance * s->scale)) {
      return;
    }
    if (best && !(s->gain > best->gain + kGainRelTolerance * std::abs(best->gain))) {
      return;
    }
    best = SplitCandidate{f, static_cast<BinIndex>(b), s->gain, left, right, missing_left};
  };

  for (auto const f : features) {
    auto const n_bins = layout.n_bins(f);
    auto const miss = hist.missing(f);
    auto const values_total = parent - miss;
    GradStats prefix;
    for (std::size_t b = 0; b + 1 < n_bins; ++b) {
      prefix += hist.cell(f, b);
      if (prefix.count == 0) {
        continue;
      }
      if (prefix.count == values_total.count) {
        break;
      }
      auto const suffix = values_total - prefix;
      consider(f, b, prefix + miss, suffix, true);
      if (miss.count > 0) {
        consider(f, b, prefix, suffix + miss, false);
      }
    }
  }
  return best;
}

}  // namespace jamflow::trees
