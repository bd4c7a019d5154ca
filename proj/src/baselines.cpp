#include "nameres/baselines.hpp"

#include <algorithm>
#include <climits>
#include <cmath>

#include "nameres/errors.hpp"

namespace nameres {

ThresholdChoice fit_threshold(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.empty()) throw DataError("threshold fit needs validation scores");
  if (scores.size() != labels.size()) throw DataError("score and label counts disagree");
  for (int l : labels)
    if (l != 0 && l != 1) throw DataError("threshold labels must be 0 or 1");

  std::vector<double> distinct(scores);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<double> cuts;
  cuts.push_back(distinct.front() - 1.0);  // accept everything
  for (size_t i = 0; i + 1 < distinct.size(); ++i)
    cuts.push_back(0.5 * (distinct[i] + distinct[i + 1]));
  cuts.push_back(distinct.back() + 1.0);  // reject everything

  ThresholdChoice best;
  best.accuracy = -1.0;
  for (double theta : cuts) {
    long right = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
      const int predicted = scores[i] >= theta ? 1 : 0;
      if (predicted == labels[i]) ++right;
    }
    const double acc = static_cast<double>(right) / static_cast<double>(scores.size());
    if (acc > best.accuracy) {  // strict: ties keep the smaller theta
      best.accuracy = acc;
      best.theta = theta;
    }
  }
  return best;
}

namespace {

template <class TopScore>
std::vector<SliceOutcome> matcher_outcomes(MatchContext& ctx, const MatcherParams& matcher,
                                           const std::vector<CandidateSet>& samples,
                                           const TopScore& accept_top) {
  std::vector<SliceOutcome> outcomes;
  outcomes.reserve(samples.size());
  for (const CandidateSet& sample : samples) {
    SliceOutcome o;
    o.gold = sample.gold;
    if (sample.candidates.empty()) {
      o.gold_rank = INT_MAX;
      outcomes.push_back(o);
      continue;
    }
    std::vector<RankedCandidate> ranked =
        rank_candidates(ctx, matcher, sample.target, sample.candidates);
    o.predicted = accept_top(ranked.front()) ? 1 : 0;
    if (sample.gold == GoldKind::person) {
      o.gold_rank = INT_MAX;
      for (size_t i = 0; i < ranked.size(); ++i)
        if (ranked[i].person == sample.gold_person) {
          o.gold_rank = static_cast<int>(i) + 1;
          break;
        }
      o.top_is_gold = ranked.front().person == sample.gold_person;
    }
    outcomes.push_back(o);
  }
  return outcomes;
}

}  // namespace

SliceEval evaluate_threshold(MatchContext& ctx, const MatcherParams& matcher, double theta,
                             const std::vector<CandidateSet>& samples) {
  return aggregate_outcomes(matcher_outcomes(
      ctx, matcher, samples,
      [theta](const RankedCandidate& top) { return static_cast<double>(top.score) >= theta; }));
}

void collect_top_scores(MatchContext& ctx, const MatcherParams& matcher,
                        const std::vector<CandidateSet>& samples, std::vector<double>& scores,
                        std::vector<int>& labels) {
  for (const CandidateSet& sample : samples) {
    if (sample.candidates.empty()) continue;
    std::vector<RankedCandidate> ranked =
        rank_candidates(ctx, matcher, sample.target, sample.candidates);
    scores.push_back(static_cast<double>(ranked.front().score));
    labels.push_back(sample.gold == GoldKind::person &&
                             ranked.front().person == sample.gold_person
                         ? 1
                         : 0);
  }
}

std::vector<FeatureRow> feature_rows(const Corpus& corpus,
                                     const std::vector<CandidateSet>& samples) {
  std::vector<FeatureRow> rows;
  for (const CandidateSet& sample : samples)
    for (const std::string& person : sample.candidates) {
      FeatureRow row;
      row.target = sample.target;
      row.person = person;
      row.label =
          sample.gold == GoldKind::person && person == sample.gold_person ? 1 : 0;
      rows.push_back(std::move(row));
    }

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
    FeatureRow& row = rows[static_cast<size_t>(i)];
    row.x = extract_features(corpus, row.target, row.person);
  }
  return rows;
}

SliceEval evaluate_boosted(const Corpus& corpus, const BoostedModel& model,
                           const std::vector<CandidateSet>& samples) {
  std::vector<SliceOutcome> outcomes(samples.size());

#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < static_cast<int>(samples.size()); ++s) {
    const CandidateSet& sample = samples[static_cast<size_t>(s)];
    SliceOutcome o;
    o.gold = sample.gold;
    if (sample.candidates.empty()) {
      o.gold_rank = INT_MAX;
      outcomes[static_cast<size_t>(s)] = o;
      continue;
    }
    struct Scored {
      std::string person;
      double p;
    };
    std::vector<Scored> scored;
    scored.reserve(sample.candidates.size());
    for (const std::string& person : sample.candidates)
      scored.push_back({person, model.probability(extract_features(corpus, sample.target, person))});
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
      if (a.p != b.p) return a.p > b.p;
      return a.person < b.person;
    });
    o.predicted = scored.front().p > 0.5 ? 1 : 0;
    if (sample.gold == GoldKind::person) {
      o.gold_rank = INT_MAX;
      for (size_t i = 0; i < scored.size(); ++i)
        if (scored[i].person == sample.gold_person) {
          o.gold_rank = static_cast<int>(i) + 1;
          break;
        }
      o.top_is_gold = scored.front().person == sample.gold_person;
    }
    outcomes[static_cast<size_t>(s)] = o;
  }
  return aggregate_outcomes(outcomes);
}

}  // namespace nameres
