#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nameres/decider.hpp"
#include "nameres/matcher.hpp"
#include "nameres/types.hpp"

namespace nameres {

/// One ranking outcome: the candidate order produced for a target plus the
/// person that should have won.
struct RankedGold {
  std::vector<std::string> ranking;  // person ids, best first
  std::string gold;
};

/// 1-based position of `gold` in `ranked`; absent gold is an error.
int gold_rank(const std::vector<std::string>& ranked, const std::string& gold);

/// Fraction of lists whose gold person sits within the first k positions.
double hr_at_k(const std::vector<RankedGold>& lists, int k);

/// Mean reciprocal 1-based rank of the gold person.
double mrr(const std::vector<RankedGold>& lists);

/// Outcome of one accept/reject decision, reduced to what the confusion
/// counts need. `top_is_gold` is meaningful only for resolvable targets.
struct AssignmentRecord {
  GoldKind gold = GoldKind::person;
  bool top_is_gold = false;  // the top-ranked candidate is the right person
  int predicted = 0;         // 1 = accepted the top candidate
};

struct Confusion {
  long tp = 0;  // right person on top, accepted
  long fn = 0;  // right person exists, rejected
  long tn = 0;  // no right person, rejected
  long fp = 0;  // accepted a wrong person (unresolvable target or mis-ranked list)
};

Confusion decision_confusion(const std::vector<AssignmentRecord>& records);

struct PrF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool degenerate = false;  // some denominator was zero; zeros above are placeholders
};

/// Both populations' precision/recall/F1 from one confusion: the "accept"
/// side scores tp against fp/fn, the "reject" side scores tn against fn/fp.
struct DecisionMetrics {
  PrF1 pos;  // targets resolved to a person
  PrF1 nil;  // targets rejected as having no owner
};

DecisionMetrics pr_f1(const Confusion& c);

/// Ranking difficulty of one resolvable target: its coauthor-separation
/// ratio (when defined) and whether the right person won the ranking.
struct StratifiedInstance {
  double ratio = 0.0;
  bool defined = true;  // false: all candidates tie on shared coauthors
  bool hit = false;     // right person ranked first
};

struct RatioBucket {
  double lo = 0.0, hi = 0.0;  // (lo, hi]; the first bucket also admits lo
  int count = 0;
  int hits = 0;
  std::optional<double> hr1;  // absent for empty buckets, never a fake zero
};

struct StratifiedReport {
  std::vector<RatioBucket> buckets;
  RatioBucket degenerate;  // undefined ratios, reported apart from the scale
  RatioBucket easy;        // ratio strictly above the split
  RatioBucket hard;        // ratio at or below the split
  double split = 0.4;
};

/// Buckets instances by ratio into `bins` equal-width intervals over [0,1]
/// plus the easy/hard summary at `split`.
StratifiedReport stratified_report(const std::vector<StratifiedInstance>& instances,
                                   int bins = 10, double split = 0.4);

/// Manufactures unresolvable test samples from resolvable ones by deleting
/// the right person from each candidate list. Inputs already lacking a gold
/// person are dropped, not duplicated.
std::vector<CandidateSet> make_nil_variants(const std::vector<CandidateSet>& samples);

/// One sample's end-to-end outcome, reduced to what the aggregate metrics
/// need. For resolvable samples `gold_rank` is 1-based, INT_MAX when the
/// candidate list never contained the right person; for unresolvable ones
/// it is ignored.
struct SliceOutcome {
  GoldKind gold = GoldKind::person;
  int gold_rank = 0;
  bool top_is_gold = false;
  int predicted = 0;
};

/// Full ranking + decision sweep of a sample slice under frozen parameters.
struct SliceEval {
  int n_pos = 0;
  int n_nil = 0;
  int gold_missing = 0;  // resolvable samples whose candidates omit the gold person
  double hr1 = 0.0, hr3 = 0.0, hr5 = 0.0, mrr = 0.0;
  Confusion confusion;
  DecisionMetrics metrics;
  /// 1-based gold ranks of the resolvable samples in input order; INT_MAX
  /// marks a candidate list that never contained the right person.
  std::vector<int> pos_gold_ranks;
};

/// Metric aggregation shared by every ranking/decision combination
/// (kernel matcher + classifier, score cuts, boosted baselines).
SliceEval aggregate_outcomes(const std::vector<SliceOutcome>& outcomes);

SliceEval evaluate_slice(MatchContext& ctx, const MatcherParams& matcher,
                         const DeciderParams& decider, const std::vector<CandidateSet>& samples);

struct EvalReport {
  SliceEval slice;
  StratifiedReport stratified;
};

/// JSON object (stable key order, 2-space indent) and aligned text table.
std::string eval_report_json(const EvalReport& report);
std::string eval_report_text(const EvalReport& report);

}  // namespace nameres
