#pragma once

#include <array>
#include <string>
#include <vector>

#include "nameres/types.hpp"

namespace nameres {

inline constexpr int kFeatureCount = 22;

/// Hand-engineered evidence for one (target occurrence, candidate person)
/// pair, in the fixed order of `feature_names()`:
///   1  candidate's paper count
///   2  distinct coauthor names beside the target author
///   3  distinct coauthor names across the candidate's papers
///   4  shared coauthor names between the two
///   5  4 divided by 2
///   6  4 divided by 3
///   7  candidate papers whose affiliation equals the target author's
///   8  7 divided by the candidate papers carrying any affiliation
///   9  affiliation cosine (term counts)
///   10 affiliation Jaccard (term sets)
///   11 candidate's distinct venue count
///   12 candidate papers in the target paper's venue
///   13 12 divided by the candidate papers carrying any venue
///   14 venue cosine
///   15 venue Jaccard
///   16 title cosine
///   17 title Jaccard
///   18 candidate's distinct keyword count
///   19 candidate keyword occurrences that appear on the target paper
///   20 19 divided by all candidate keyword occurrences
///   21 keyword cosine (whole phrases as units)
///   22 keyword Jaccard (whole phrases as units)
/// Exact-match features (7, 12, 19) compare strings lowercased with
/// punctuation squeezed to single spaces; cosine/Jaccard features tokenize
/// with the standard stop-word-filtered tokenizer, except keywords, which
/// stay whole phrases. Empty attribute sets score 0. The candidate's
/// profile never includes the target's own paper.
using FeatureVector = std::array<double, kFeatureCount>;

const std::array<std::string, kFeatureCount>& feature_names();

FeatureVector extract_features(const Corpus& corpus, const TargetPair& target,
                               const std::string& person_id);

struct FeatureRow {
  TargetPair target;
  std::string person;
  int label = 0;
  FeatureVector x{};
};

/// CSV with the fixed header: paper_id, author_index, person, label, then
/// the 22 feature columns in table order.
void write_features_csv(const std::vector<FeatureRow>& rows, const std::string& path);

}  // namespace nameres
