#pragma once

#include <cstdint>
#include <vector>

#include "nameres/features.hpp"

namespace nameres {

/// Binary regression-tree node; `feature < 0` marks a leaf carrying `value`.
/// Interior nodes route x[feature] <= threshold left, else right.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // node 0 is the root

  double operator()(const FeatureVector& x) const;
};

/// Boosted trees over the hand-engineered features with a logistic link:
/// raw score = prior + shrinkage * sum of tree outputs.
struct BoostedModel {
  double prior = 0.0;  // log-odds of the training base rate
  double shrinkage = 0.1;
  std::vector<RegressionTree> trees;

  double raw_score(const FeatureVector& x) const;
  double probability(const FeatureVector& x) const;  // sigmoid of the raw score
};

struct BoostConfig {
  int rounds = 100;
  int depth = 3;
  double shrinkage = 0.1;
  int min_leaf = 1;   // samples a leaf may not go below
  uint64_t seed = 1;  // reserved; fitting is exact greedy and needs no draws
};

/// Greedy second-order boosting on logistic loss: each round fits a depth-
/// limited tree to the current residuals with exact split search (midpoints
/// of consecutive distinct feature values) and Newton leaf values.
BoostedModel train_boosted(const std::vector<FeatureVector>& x, const std::vector<int>& y,
                           const BoostConfig& cfg);

}  // namespace nameres
