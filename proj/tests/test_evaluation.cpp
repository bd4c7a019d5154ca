#include <doctest.h>

#include <climits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nameres/corpus.hpp"
#include "nameres/errors.hpp"
#include "nameres/evaluation.hpp"
#include "nameres/pipeline.hpp"
#include "testutil.hpp"

using namespace nameres;

namespace {

AssignmentRecord rec(GoldKind gold, bool top_is_gold, int predicted) {
  return {gold, top_is_gold, predicted};
}

/// Twelve decisions exercising every confusion clause:
/// 3 right-and-accepted, 2 rejected-with-an-owner, 3 correctly-rejected,
/// 2 wrong-top-accepted plus 2 ownerless-accepted.
std::vector<AssignmentRecord> twelve() {
  return {
      rec(GoldKind::person, true, 1),  rec(GoldKind::person, true, 1),
      rec(GoldKind::person, true, 1),  rec(GoldKind::person, true, 0),
      rec(GoldKind::person, false, 0), rec(GoldKind::nil, false, 0),
      rec(GoldKind::nil, false, 0),    rec(GoldKind::nil, false, 0),
      rec(GoldKind::person, false, 1), rec(GoldKind::person, false, 1),
      rec(GoldKind::nil, false, 1),    rec(GoldKind::nil, false, 1),
  };
}

}  // namespace

TEST_CASE("every decision lands in exactly one confusion cell") {
  const Confusion c = decision_confusion(twelve());
  CHECK(c.tp == 3);
  CHECK(c.fn == 2);
  CHECK(c.tn == 3);
  CHECK(c.fp == 4);
  CHECK(c.tp + c.fn + c.tn + c.fp == 12);

  CHECK(decision_confusion({}).tp == 0);
}

TEST_CASE("precision, recall and f1 come out in closed form") {
  const DecisionMetrics m = pr_f1(decision_confusion(twelve()));
  CHECK(m.pos.precision == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
  CHECK(m.pos.recall == doctest::Approx(3.0 / 5.0).epsilon(1e-12));
  const double pp = 3.0 / 7.0, pr = 3.0 / 5.0;
  CHECK(m.pos.f1 == doctest::Approx(2.0 * pp * pr / (pp + pr)).epsilon(1e-12));
  CHECK_FALSE(m.pos.degenerate);
  CHECK(m.nil.precision == doctest::Approx(3.0 / 5.0).epsilon(1e-12));
  CHECK(m.nil.recall == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
  CHECK_FALSE(m.nil.degenerate);

  const DecisionMetrics n = pr_f1({8, 2, 9, 1});
  CHECK(n.pos.precision == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
  CHECK(n.pos.recall == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(n.nil.precision == doctest::Approx(9.0 / 11.0).epsilon(1e-12));
  CHECK(n.nil.recall == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("zero denominators flag the population as degenerate") {
  const DecisionMetrics all_zero = pr_f1({0, 0, 0, 0});
  CHECK(all_zero.pos.degenerate);
  CHECK(all_zero.nil.degenerate);
  CHECK(all_zero.pos.precision == 0.0);
  CHECK(all_zero.pos.f1 == 0.0);

  // nothing accepted: accept-side precision denominator collapses
  const DecisionMetrics no_accept = pr_f1({0, 5, 5, 0});
  CHECK(no_accept.pos.degenerate);
  CHECK_FALSE(no_accept.nil.degenerate);
  CHECK(no_accept.nil.precision == 0.5);
  CHECK(no_accept.nil.recall == 1.0);

  // denominators fine but zero hits on the accept side
  const DecisionMetrics zero_hits = pr_f1({0, 3, 1, 2});
  CHECK(zero_hits.pos.degenerate);
  CHECK(zero_hits.pos.precision == 0.0);
}

TEST_CASE("hit ratios and reciprocal ranks follow the planted positions") {
  auto list = [](std::vector<std::string> ranking, std::string gold) {
    return RankedGold{std::move(ranking), std::move(gold)};
  };
  const std::vector<RankedGold> lists = {
      list({"a", "b"}, "a"),
      list({"b", "a"}, "a"),
      list({"b", "c", "a"}, "a"),
      list({"b", "c", "d", "a"}, "a"),
      list({"b", "c", "d", "e", "f", "g", "h", "i", "j", "a"}, "a"),
  };
  CHECK(gold_rank(lists[2].ranking, "a") == 3);
  CHECK_THROWS_AS(gold_rank(lists[0].ranking, "zz"), DataError);

  CHECK(hr_at_k(lists, 1) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(hr_at_k(lists, 3) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(hr_at_k(lists, 5) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(hr_at_k(lists, 10) == 1.0);
  CHECK(mrr(lists) == doctest::Approx((1.0 + 0.5 + 1.0 / 3 + 0.25 + 0.1) / 5).epsilon(1e-12));

  CHECK(hr_at_k({}, 1) == 0.0);
  CHECK(mrr({}) == 0.0);
  CHECK_THROWS_AS(hr_at_k(lists, 0), ConfigError);

  const std::vector<RankedGold> single = {list({"x"}, "x")};
  CHECK(hr_at_k(single, 1) == 1.0);
  CHECK(mrr(single) == 1.0);
}

TEST_CASE("ratio buckets are half-open with the first closed at zero") {
  auto inst = [](double ratio, bool hit) { return StratifiedInstance{ratio, true, hit}; };
  std::vector<StratifiedInstance> xs = {
      inst(0.0, true),    // first bucket despite the open lower bound
      inst(0.1, false),   // (0.0, 0.1] stays in bucket 0
      inst(0.10001, true),
      inst(0.45, true),   // strictly above the 0.4 split: easy
      inst(0.40, false),  // at the split: hard
      inst(0.39, true),
      inst(1.0, true),
      {0.0, false, true},  // undefined ratio, reported apart
  };
  const StratifiedReport rep = stratified_report(xs, 10, 0.4);
  REQUIRE(rep.buckets.size() == 10);
  CHECK(rep.buckets[0].count == 2);
  CHECK(rep.buckets[0].hits == 1);
  CHECK(*rep.buckets[0].hr1 == 0.5);
  CHECK(rep.buckets[1].count == 1);
  CHECK(rep.buckets[3].count == 2);  // 0.39 and 0.40
  CHECK(rep.buckets[4].count == 1);  // 0.45
  CHECK(rep.buckets[9].count == 1);  // 1.0 in the closing bucket
  CHECK(rep.buckets[5].count == 0);
  CHECK_FALSE(rep.buckets[5].hr1.has_value());

  CHECK(rep.degenerate.count == 1);
  CHECK(rep.degenerate.hits == 1);
  CHECK(rep.easy.count == 2);  // 0.45 and 1.0
  CHECK(rep.easy.hits == 2);
  CHECK(rep.hard.count == 5);
  CHECK(rep.hard.hits == 3);
  const int total = rep.easy.count + rep.hard.count + rep.degenerate.count;
  CHECK(total == static_cast<int>(xs.size()));

  CHECK_THROWS_AS(stratified_report({inst(1.5, true)}, 10, 0.4), DataError);
  CHECK_THROWS_AS(stratified_report({inst(-0.1, true)}, 10, 0.4), DataError);
  CHECK_THROWS_AS(stratified_report(xs, 0, 0.4), ConfigError);
  CHECK_THROWS_AS(stratified_report(xs, 10, 1.5), ConfigError);
}

TEST_CASE("unresolvable variants drop the right person and nothing else") {
  CandidateSet a;
  a.target = {"p1", 0};
  a.candidates = {"x", "gold", "y"};
  a.gold = GoldKind::person;
  a.gold_person = "gold";
  CandidateSet b;
  b.target = {"p2", 1};
  b.candidates = {"x", "y"};
  b.gold = GoldKind::person;
  b.gold_person = "offlist";  // already absent: the list survives whole
  CandidateSet c;
  c.target = {"p3", 0};
  c.candidates = {"x"};
  c.gold = GoldKind::nil;  // already unresolvable: dropped, not duplicated

  const std::vector<CandidateSet> vars = make_nil_variants({a, b, c});
  REQUIRE(vars.size() == 2);
  CHECK(vars[0].target == a.target);
  CHECK(vars[0].gold == GoldKind::nil);
  CHECK(vars[0].candidates == std::vector<std::string>{"x", "y"});
  CHECK(vars[1].candidates == std::vector<std::string>{"x", "y"});
}

TEST_CASE("aggregation reduces outcomes to the published metrics") {
  std::vector<SliceOutcome> outcomes(5);
  outcomes[0] = {GoldKind::person, 1, true, 1};        // tp, rank 1
  outcomes[1] = {GoldKind::person, 3, false, 0};       // fn, rank 3
  outcomes[2] = {GoldKind::person, INT_MAX, false, 0};  // fn, gold missing
  outcomes[3] = {GoldKind::nil, 0, false, 0};          // tn
  outcomes[4] = {GoldKind::nil, 0, false, 1};          // fp

  const SliceEval ev = aggregate_outcomes(outcomes);
  CHECK(ev.n_pos == 3);
  CHECK(ev.n_nil == 2);
  CHECK(ev.gold_missing == 1);
  CHECK(ev.hr1 == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(ev.hr3 == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(ev.hr5 == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(ev.mrr == doctest::Approx((1.0 + 1.0 / 3) / 3).epsilon(1e-12));
  CHECK(ev.confusion.tp == 1);
  CHECK(ev.confusion.fn == 2);
  CHECK(ev.confusion.tn == 1);
  CHECK(ev.confusion.fp == 1);
  CHECK(ev.pos_gold_ranks == std::vector<int>{1, 3, INT_MAX});

  const SliceEval empty = aggregate_outcomes({});
  CHECK(empty.n_pos == 0);
  CHECK(empty.hr1 == 0.0);
  CHECK(empty.mrr == 0.0);
}

TEST_CASE("the slice sweep agrees with a hand-rolled rank-and-judge loop") {
  SynthConfig cfg;
  cfg.num_names = 2;
  cfg.persons_per_name = 3;
  cfg.papers_per_person = 5;
  const Corpus corpus = gen_synthetic(cfg, 23);
  const SplitResult split = split_corpus(corpus, 0.3, 0.3, 31);
  SkipgramConfig scfg;
  scfg.dim = 8;
  scfg.epochs = 1;
  const EmbTables tables = train_embeddings(split.corpus, {}, scfg);
  MatcherInitConfig icfg;
  icfg.hidden = {8};
  const MatcherParams matcher = init_matcher(tables, icfg);
  DeciderInitConfig dcfg;
  dcfg.input_width = matcher.phi_width();
  dcfg.hidden = {6};
  const DeciderParams decider = init_decider(dcfg);
  MatchContext ctx(split.corpus, matcher.names.vocab, matcher.words.vocab);

  std::vector<CandidateSet> sets =
      build_candidate_sets(split.corpus, split.test_targets, CandidateMode::variants);
  const std::vector<CandidateSet> nils = make_nil_variants(sets);
  sets.insert(sets.end(), nils.begin(), nils.end());
  CandidateSet empty;
  empty.target = sets.front().target;
  empty.gold = GoldKind::person;
  empty.gold_person = "nobody";
  sets.push_back(empty);

  std::vector<SliceOutcome> manual;
  for (const CandidateSet& s : sets) {
    SliceOutcome o;
    o.gold = s.gold;
    if (s.candidates.empty()) {
      o.gold_rank = INT_MAX;
      manual.push_back(o);
      continue;
    }
    const auto ranked = rank_candidates(ctx, matcher, s.target, s.candidates);
    o.predicted = predict(std::span<const float>(ranked.front().phi), decider).label;
    if (s.gold == GoldKind::person) {
      o.gold_rank = INT_MAX;
      for (size_t i = 0; i < ranked.size(); ++i)
        if (ranked[i].person == s.gold_person) o.gold_rank = std::min(o.gold_rank, (int)i + 1);
      o.top_is_gold = ranked.front().person == s.gold_person;
    }
    manual.push_back(o);
  }
  const SliceEval want = aggregate_outcomes(manual);
  const SliceEval got = evaluate_slice(ctx, matcher, decider, sets);
  CHECK(got.n_pos == want.n_pos);
  CHECK(got.n_nil == want.n_nil);
  CHECK(got.gold_missing == want.gold_missing);
  CHECK(got.hr1 == want.hr1);
  CHECK(got.hr3 == want.hr3);
  CHECK(got.hr5 == want.hr5);
  CHECK(got.mrr == want.mrr);
  CHECK(got.confusion.tp == want.confusion.tp);
  CHECK(got.confusion.fn == want.confusion.fn);
  CHECK(got.confusion.tn == want.confusion.tn);
  CHECK(got.confusion.fp == want.confusion.fp);
  CHECK(got.pos_gold_ranks == want.pos_gold_ranks);
  CHECK(got.n_pos + got.n_nil == static_cast<int>(sets.size()));
}

TEST_CASE("reports serialize with stable keys and honest empty buckets") {
  EvalReport report;
  std::vector<SliceOutcome> outcomes(3);
  outcomes[0] = {GoldKind::person, 1, true, 1};
  outcomes[1] = {GoldKind::person, 2, false, 0};
  outcomes[2] = {GoldKind::nil, 0, false, 0};
  report.slice = aggregate_outcomes(outcomes);
  std::vector<StratifiedInstance> inst = {{0.05, true, true}, {0.95, true, false}};
  report.stratified = stratified_report(inst, 10, 0.4);

  const std::string text = eval_report_json(report);
  const nlohmann::json j = nlohmann::json::parse(text);
  CHECK(j.at("n_pos").get<int>() == 2);
  CHECK(j.at("n_nil").get<int>() == 1);
  CHECK(j.at("hr1").get<double>() == 0.5);
  CHECK(j.at("confusion").at("tp").get<long>() == 1);
  CHECK(j.at("pos").at("precision").get<double>() == 1.0);
  CHECK(j.at("stratified").at("buckets").size() == 10);
  CHECK(j.at("stratified").at("buckets")[0].at("count").get<int>() == 1);
  CHECK(j.at("stratified").at("buckets")[0].at("hr1").get<double>() == 1.0);
  CHECK(j.at("stratified").at("buckets")[5].at("hr1").is_null());
  CHECK(j.at("stratified").at("easy").at("count").get<int>() == 1);

  const std::string table = eval_report_text(report);
  CHECK(table.find("hr@1 0.5000") != std::string::npos);
  CHECK(table.find("tp 1") != std::string::npos);
  CHECK(table.find("2 resolvable, 1 unresolvable") != std::string::npos);
  CHECK(table.find("degenerate") != std::string::npos);
  CHECK(table.find("hr@1 -") != std::string::npos);  // empty buckets stay blank
}
