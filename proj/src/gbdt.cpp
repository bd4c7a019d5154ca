#include "nameres/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nameres/errors.hpp"

namespace nameres {

double RegressionTree::operator()(const FeatureVector& x) const {
  int i = 0;
  while (nodes[static_cast<size_t>(i)].feature >= 0) {
    const TreeNode& n = nodes[static_cast<size_t>(i)];
    i = x[static_cast<size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<size_t>(i)].value;
}

double BoostedModel::raw_score(const FeatureVector& x) const {
  double s = prior;
  for (const RegressionTree& t : trees) s += shrinkage * t(x);
  return s;
}

double BoostedModel::probability(const FeatureVector& x) const {
  return 1.0 / (1.0 + std::exp(-raw_score(x)));
}

namespace {

struct Fit {
  const std::vector<FeatureVector>* x;
  const std::vector<double>* residual;  // y - p
  const std::vector<double>* hessian;   // p (1 - p)
  int min_leaf;
};

/// Exact greedy split of `rows`: the (feature, midpoint) pair with the best
/// squared-error gain on the residuals. Deterministic: features scanned in
/// order, strictly better gain required to switch.
struct Split {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

Split best_split(const Fit& fit, const std::vector<int>& rows) {
  Split best;
  double total_r = 0.0;
  for (int i : rows) total_r += (*fit.residual)[static_cast<size_t>(i)];
  const double n = static_cast<double>(rows.size());
  const double parent = total_r * total_r / n;

  std::vector<int> order(rows);
  for (int f = 0; f < kFeatureCount; ++f) {
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double va = (*fit.x)[static_cast<size_t>(a)][static_cast<size_t>(f)];
      const double vb = (*fit.x)[static_cast<size_t>(b)][static_cast<size_t>(f)];
      if (va != vb) return va < vb;
      return a < b;
    });
    double left_r = 0.0;
    for (size_t k = 0; k + 1 < order.size(); ++k) {
      left_r += (*fit.residual)[static_cast<size_t>(order[k])];
      const double v = (*fit.x)[static_cast<size_t>(order[k])][static_cast<size_t>(f)];
      const double next = (*fit.x)[static_cast<size_t>(order[k + 1])][static_cast<size_t>(f)];
      if (v == next) continue;  // only between distinct values
      const double nl = static_cast<double>(k + 1);
      const double nr = n - nl;
      if (nl < fit.min_leaf || nr < fit.min_leaf) continue;
      const double right_r = total_r - left_r;
      const double gain = left_r * left_r / nl + right_r * right_r / nr - parent;
      if (gain > best.gain + 1e-12) {
        best.found = true;
        best.feature = f;
        best.threshold = 0.5 * (v + next);
        best.gain = gain;
      }
    }
  }
  return best;
}

int grow(RegressionTree& tree, const Fit& fit, std::vector<int>&& rows, int depth_left) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();

  Split split;
  if (depth_left > 0 && static_cast<int>(rows.size()) >= 2 * fit.min_leaf)
    split = best_split(fit, rows);

  if (!split.found) {
    double r = 0.0, h = 0.0;
    for (int i : rows) {
      r += (*fit.residual)[static_cast<size_t>(i)];
      h += (*fit.hessian)[static_cast<size_t>(i)];
    }
    tree.nodes[static_cast<size_t>(id)].value = r / std::max(h, 1e-12);
    return id;
  }

  std::vector<int> left, right;
  for (int i : rows) {
    if ((*fit.x)[static_cast<size_t>(i)][static_cast<size_t>(split.feature)] <= split.threshold)
      left.push_back(i);
    else
      right.push_back(i);
  }
  rows.clear();
  const int l = grow(tree, fit, std::move(left), depth_left - 1);
  const int r = grow(tree, fit, std::move(right), depth_left - 1);
  TreeNode& node = tree.nodes[static_cast<size_t>(id)];
  node.feature = split.feature;
  node.threshold = split.threshold;
  node.left = l;
  node.right = r;
  return id;
}

}  // namespace

BoostedModel train_boosted(const std::vector<FeatureVector>& x, const std::vector<int>& y,
                           const BoostConfig& cfg) {
  if (cfg.rounds < 0) throw ConfigError("boosting rounds must be non-negative");
  if (cfg.depth < 1) throw ConfigError("tree depth must be positive");
  if (!(cfg.shrinkage > 0)) throw ConfigError("shrinkage must be positive");
  if (cfg.min_leaf < 1) throw ConfigError("leaf size must be positive");
  if (x.size() != y.size()) throw DataError("feature and label counts disagree");
  if (x.empty()) throw DataError("boosting needs training rows");
  long pos = 0;
  for (int label : y) {
    if (label != 0 && label != 1) throw DataError("boosting labels must be 0 or 1");
    pos += label;
  }
  if (pos == 0 || pos == static_cast<long>(y.size()))
    throw DataError("boosting dataset carries a single label; nothing separable to learn");

  BoostedModel model;
  model.shrinkage = cfg.shrinkage;
  const double rate = static_cast<double>(pos) / static_cast<double>(y.size());
  model.prior = std::log(rate / (1.0 - rate));

  const size_t n = x.size();
  std::vector<double> score(n, model.prior), residual(n), hessian(n);
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);

  for (int round = 0; round < cfg.rounds; ++round) {
    for (size_t i = 0; i < n; ++i) {
      const double p = 1.0 / (1.0 + std::exp(-score[i]));
      residual[i] = static_cast<double>(y[i]) - p;
      hessian[i] = std::max(p * (1.0 - p), 1e-12);
    }
    RegressionTree tree;
    const Fit fit{&x, &residual, &hessian, cfg.min_leaf};
    grow(tree, fit, std::vector<int>(all), cfg.depth);
    for (size_t i = 0; i < n; ++i) score[i] += cfg.shrinkage * tree(x[i]);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace nameres
