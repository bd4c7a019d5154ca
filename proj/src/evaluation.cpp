#include "nameres/evaluation.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdio>
#include <span>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nameres {

using json = nlohmann::json;

int gold_rank(const std::vector<std::string>& ranked, const std::string& gold) {
  for (size_t i = 0; i < ranked.size(); ++i)
    if (ranked[i] == gold) return static_cast<int>(i) + 1;
  throw DataError("ranking for gold person \"" + gold + "\" does not contain it");
}

double hr_at_k(const std::vector<RankedGold>& lists, int k) {
  if (k < 1) throw ConfigError("hit-ratio cutoff must be at least 1");
  if (lists.empty()) return 0.0;
  long hits = 0;
  for (const RankedGold& l : lists)
    if (gold_rank(l.ranking, l.gold) <= k) ++hits;
  return static_cast<double>(hits) / static_cast<double>(lists.size());
}

double mrr(const std::vector<RankedGold>& lists) {
  if (lists.empty()) return 0.0;
  double sum = 0.0;
  for (const RankedGold& l : lists) sum += 1.0 / static_cast<double>(gold_rank(l.ranking, l.gold));
  return sum / static_cast<double>(lists.size());
}

Confusion decision_confusion(const std::vector<AssignmentRecord>& records) {
  Confusion c;
  for (const AssignmentRecord& r : records) {
    if (r.gold == GoldKind::nil) {
      if (r.predicted == 1)
        ++c.fp;
      else
        ++c.tn;
    } else if (r.predicted == 0) {
      ++c.fn;
    } else if (r.top_is_gold) {
      ++c.tp;
    } else {
      ++c.fp;  // accepted the list's top, but the right person was not on top
    }
  }
  return c;
}

namespace {

PrF1 rates(long hit, long miss_precision, long miss_recall) {
  PrF1 out;
  const long pd = hit + miss_precision;
  const long rd = hit + miss_recall;
  if (pd == 0 || rd == 0) {
    out.degenerate = true;
    return out;
  }
  out.precision = static_cast<double>(hit) / static_cast<double>(pd);
  out.recall = static_cast<double>(hit) / static_cast<double>(rd);
  if (out.precision + out.recall == 0.0)
    out.degenerate = true;
  else
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

}  // namespace

DecisionMetrics pr_f1(const Confusion& c) {
  DecisionMetrics m;
  m.pos = rates(c.tp, c.fp, c.fn);
  m.nil = rates(c.tn, c.fn, c.fp);
  return m;
}

StratifiedReport stratified_report(const std::vector<StratifiedInstance>& instances, int bins,
                                   double split) {
  if (bins < 1) throw ConfigError("stratified report needs at least one bucket");
  if (!(split >= 0.0 && split <= 1.0)) throw ConfigError("easy/hard split must lie in [0,1]");
  StratifiedReport rep;
  rep.split = split;
  const double width = 1.0 / static_cast<double>(bins);
  for (int i = 0; i < bins; ++i)
    rep.buckets.push_back({width * i, width * (i + 1), 0, 0, std::nullopt});
  rep.degenerate = {0.0, 1.0, 0, 0, std::nullopt};
  rep.easy = {split, 1.0, 0, 0, std::nullopt};
  rep.hard = {0.0, split, 0, 0, std::nullopt};

  auto land = [](RatioBucket& b, bool hit) {
    ++b.count;
    if (hit) ++b.hits;
  };
  for (const StratifiedInstance& inst : instances) {
    if (!inst.defined) {
      land(rep.degenerate, inst.hit);
      continue;
    }
    if (!(inst.ratio >= 0.0 && inst.ratio <= 1.0))
      throw DataError("coauthor-separation ratio outside [0,1]");
    // (lo, hi] intervals; a defined ratio of exactly 0 belongs to the first.
    int slot = static_cast<int>(std::ceil(inst.ratio * bins)) - 1;
    slot = std::clamp(slot, 0, bins - 1);
    land(rep.buckets[static_cast<size_t>(slot)], inst.hit);
    land(inst.ratio > split ? rep.easy : rep.hard, inst.hit);
  }
  auto finish = [](RatioBucket& b) {
    if (b.count > 0) b.hr1 = static_cast<double>(b.hits) / static_cast<double>(b.count);
  };
  for (RatioBucket& b : rep.buckets) finish(b);
  finish(rep.degenerate);
  finish(rep.easy);
  finish(rep.hard);
  return rep;
}

std::vector<CandidateSet> make_nil_variants(const std::vector<CandidateSet>& samples) {
  std::vector<CandidateSet> out;
  for (const CandidateSet& s : samples) {
    if (s.gold != GoldKind::person) continue;
    CandidateSet v;
    v.target = s.target;
    v.gold = GoldKind::nil;
    for (const std::string& person : s.candidates)
      if (person != s.gold_person) v.candidates.push_back(person);
    out.push_back(std::move(v));
  }
  return out;
}

SliceEval aggregate_outcomes(const std::vector<SliceOutcome>& outcomes) {
  SliceEval ev;
  std::vector<AssignmentRecord> records;
  records.reserve(outcomes.size());
  for (const SliceOutcome& o : outcomes) {
    records.push_back({o.gold, o.top_is_gold, o.predicted});
    if (o.gold != GoldKind::person) {
      ++ev.n_nil;
      continue;
    }
    ++ev.n_pos;
    ev.pos_gold_ranks.push_back(o.gold_rank);
    if (o.gold_rank == INT_MAX) ++ev.gold_missing;
  }

  if (ev.n_pos > 0) {
    long h1 = 0, h3 = 0, h5 = 0;
    double rr = 0.0;
    for (int r : ev.pos_gold_ranks) {
      if (r <= 1) ++h1;
      if (r <= 3) ++h3;
      if (r <= 5) ++h5;
      if (r != INT_MAX) rr += 1.0 / static_cast<double>(r);
    }
    const double n = static_cast<double>(ev.n_pos);
    ev.hr1 = static_cast<double>(h1) / n;
    ev.hr3 = static_cast<double>(h3) / n;
    ev.hr5 = static_cast<double>(h5) / n;
    ev.mrr = rr / n;
  }
  ev.confusion = decision_confusion(records);
  ev.metrics = pr_f1(ev.confusion);
  return ev;
}

SliceEval evaluate_slice(MatchContext& ctx, const MatcherParams& matcher,
                         const DeciderParams& decider, const std::vector<CandidateSet>& samples) {
  std::vector<SliceOutcome> outcomes;
  outcomes.reserve(samples.size());
  for (const CandidateSet& sample : samples) {
    SliceOutcome o;
    o.gold = sample.gold;
    if (sample.candidates.empty()) {
      // Nothing to rank: the pipeline can only reject.
      o.gold_rank = INT_MAX;
      outcomes.push_back(o);
      continue;
    }
    std::vector<RankedCandidate> ranked =
        rank_candidates(ctx, matcher, sample.target, sample.candidates);
    o.predicted = predict(std::span<const float>(ranked.front().phi), decider).label;
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
  return aggregate_outcomes(outcomes);
}

namespace {

json bucket_json(const RatioBucket& b) {
  json j;
  j["lo"] = b.lo;
  j["hi"] = b.hi;
  j["count"] = b.count;
  j["hits"] = b.hits;
  if (b.hr1)
    j["hr1"] = *b.hr1;
  else
    j["hr1"] = nullptr;
  return j;
}

json prf1_json(const PrF1& p) {
  return json{{"precision", p.precision},
              {"recall", p.recall},
              {"f1", p.f1},
              {"degenerate", p.degenerate}};
}

}  // namespace

std::string eval_report_json(const EvalReport& report) {
  const SliceEval& s = report.slice;
  json j;
  j["n_pos"] = s.n_pos;
  j["n_nil"] = s.n_nil;
  j["gold_missing"] = s.gold_missing;
  j["hr1"] = s.hr1;
  j["hr3"] = s.hr3;
  j["hr5"] = s.hr5;
  j["mrr"] = s.mrr;
  j["confusion"] = {{"tp", s.confusion.tp},
                    {"fn", s.confusion.fn},
                    {"tn", s.confusion.tn},
                    {"fp", s.confusion.fp}};
  j["pos"] = prf1_json(s.metrics.pos);
  j["nil"] = prf1_json(s.metrics.nil);
  json strat;
  strat["split"] = report.stratified.split;
  strat["buckets"] = json::array();
  for (const RatioBucket& b : report.stratified.buckets) strat["buckets"].push_back(bucket_json(b));
  strat["degenerate"] = bucket_json(report.stratified.degenerate);
  strat["easy"] = bucket_json(report.stratified.easy);
  strat["hard"] = bucket_json(report.stratified.hard);
  j["stratified"] = strat;
  return j.dump(2) + "\n";
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void bucket_row(std::ostringstream& out, const std::string& label, const RatioBucket& b) {
  out << "  " << label;
  for (size_t i = label.size(); i < 14; ++i) out << ' ';
  out << "count " << b.count;
  if (b.hr1)
    out << "  hr@1 " << fmt(*b.hr1);
  else
    out << "  hr@1 -";
  out << "\n";
}

}  // namespace

std::string eval_report_text(const EvalReport& report) {
  const SliceEval& s = report.slice;
  std::ostringstream out;
  out << "samples        " << s.n_pos << " resolvable, " << s.n_nil << " unresolvable";
  if (s.gold_missing > 0) out << " (" << s.gold_missing << " with gold outside the list)";
  out << "\n";
  out << "ranking        hr@1 " << fmt(s.hr1) << "  hr@3 " << fmt(s.hr3) << "  hr@5 " << fmt(s.hr5)
      << "  mrr " << fmt(s.mrr) << "\n";
  out << "confusion      tp " << s.confusion.tp << "  fn " << s.confusion.fn << "  tn "
      << s.confusion.tn << "  fp " << s.confusion.fp << "\n";
  auto pop = [&](const char* name, const PrF1& p) {
    out << name << fmt(p.precision) << "  recall " << fmt(p.recall) << "  f1 " << fmt(p.f1);
    if (p.degenerate) out << "  (degenerate)";
    out << "\n";
  };
  pop("accept         pre ", s.metrics.pos);
  pop("reject         pre ", s.metrics.nil);
  out << "ratio buckets  (lo, hi], first closed at 0; split " << fmt(report.stratified.split)
      << "\n";
  for (const RatioBucket& b : report.stratified.buckets) {
    std::ostringstream label;
    label << "(" << fmt(b.lo) << "," << fmt(b.hi) << "]";
    bucket_row(out, label.str(), b);
  }
  bucket_row(out, "degenerate", report.stratified.degenerate);
  bucket_row(out, "easy", report.stratified.easy);
  bucket_row(out, "hard", report.stratified.hard);
  return out.str();
}

}  // namespace nameres
