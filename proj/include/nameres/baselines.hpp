#pragma once

#include <string>
#include <vector>

#include "nameres/evaluation.hpp"
#include "nameres/gbdt.hpp"

namespace nameres {

struct ThresholdChoice {
  double theta = 0.0;
  double accuracy = 0.0;
};

/// Score cut maximizing validation accuracy when accepting scores >= theta.
/// The sweep covers midpoints of adjacent distinct scores plus one cut
/// below the minimum (accept everything) and one above the maximum (reject
/// everything); accuracy ties keep the smallest theta.
ThresholdChoice fit_threshold(const std::vector<double>& scores, const std::vector<int>& labels);

/// Rank with the matcher but replace the decision stage by the score cut:
/// the top candidate is accepted iff its score clears `theta`.
SliceEval evaluate_threshold(MatchContext& ctx, const MatcherParams& matcher, double theta,
                             const std::vector<CandidateSet>& samples);

/// Training/evaluation rows for the feature-engineered baseline: per
/// resolvable sample the gold person labeled 1 and every other candidate
/// labeled 0; unresolvable samples contribute all candidates labeled 0.
std::vector<FeatureRow> feature_rows(const Corpus& corpus,
                                     const std::vector<CandidateSet>& samples);

/// Rank candidates by boosted-model probability (ties by person id) and
/// accept the top iff its probability exceeds one half.
SliceEval evaluate_boosted(const Corpus& corpus, const BoostedModel& model,
                           const std::vector<CandidateSet>& samples);

/// Top-candidate matcher scores and right/wrong labels for fitting the cut;
/// samples with no candidates are skipped.
void collect_top_scores(MatchContext& ctx, const MatcherParams& matcher,
                        const std::vector<CandidateSet>& samples, std::vector<double>& scores,
                        std::vector<int>& labels);

}  // namespace nameres
