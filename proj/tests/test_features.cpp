#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nameres/baselines.hpp"
#include "nameres/corpus.hpp"
#include "nameres/errors.hpp"
#include "nameres/features.hpp"
#include "nameres/gbdt.hpp"
#include "nameres/pipeline.hpp"
#include "testutil.hpp"

using namespace nameres;

namespace {

PaperRecord paper(std::string id, std::string title, std::vector<std::string> keywords,
                  std::string venue, std::vector<AuthorSlot> authors) {
  PaperRecord p;
  p.id = std::move(id);
  p.title = std::move(title);
  p.keywords = std::move(keywords);
  p.venue = std::move(venue);
  p.authors = std::move(authors);
  return p;
}

/// Target p1/slot 0 (Jing Zhang at Tsinghua University) against candidate c1
/// whose profile holds p1 (excluded), p2 (same venue/coauthor/affiliation)
/// and p3 (different venue, new coauthor, affiliation variant).
Corpus feature_corpus() {
  Corpus c;
  c.papers["p1"] = paper("p1", "Deep Kernel Matching", {"kernel methods", "ranking"}, "KDD",
                         {{"Jing Zhang", "Tsinghua University"}, {"Wei Wang", "Peking University"}});
  c.papers["p2"] = paper("p2", "Kernel Ranking Models", {"Kernel--Methods"}, "KDD",
                         {{"Jing Zhang", "Tsinghua University"}, {"Wei Wang", "Peking University"}});
  c.papers["p3"] = paper("p3", "Graph Neural Networks", {"graphs", "ranking"}, "NeurIPS",
                         {{"Jing Zhang", "Tsinghua Institute"}, {"Li Chen", "Fudan University"}});
  c.papers["q1"] = paper("q1", "Deep Kernel Matching", {}, "", {{"Solo Author", ""}});
  c.persons["c1"] = PersonRecord{"c1", "Jing Zhang", {"p1", "p2", "p3"}};
  c.persons["c2"] = PersonRecord{"c2", "Solo Author", {"q1"}};
  return c;
}

double accuracy_at(const std::vector<double>& scores, const std::vector<int>& labels,
                   double theta) {
  long right = 0;
  for (size_t i = 0; i < scores.size(); ++i)
    if ((scores[i] >= theta ? 1 : 0) == labels[i]) ++right;
  return static_cast<double>(right) / static_cast<double>(scores.size());
}

}  // namespace

TEST_CASE("every pair feature matches its hand derivation") {
  const Corpus corpus = feature_corpus();
  const FeatureVector x = extract_features(corpus, {"p1", 0}, "c1");

  CHECK(x[0] == 2.0);  // p1 never counts toward its own candidate
  CHECK(x[1] == 1.0);  // {wei wang}
  CHECK(x[2] == 2.0);  // {wei wang, li chen}
  CHECK(x[3] == 1.0);
  CHECK(x[4] == 1.0);
  CHECK(x[5] == 0.5);
  CHECK(x[6] == 1.0);  // only p2 repeats "tsinghua university"
  CHECK(x[7] == 0.5);
  // org bags: {tsinghua, university} vs {tsinghua x2, university, institute}
  CHECK(x[8] == doctest::Approx(3.0 / std::sqrt(12.0)).epsilon(1e-12));
  CHECK(x[9] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(x[10] == 2.0);  // {kdd, neurips}
  CHECK(x[11] == 1.0);
  CHECK(x[12] == 0.5);
  CHECK(x[13] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(x[14] == 0.5);
  // titles: {deep, kernel, matching} vs {kernel, ranking, models, graph, neural, networks}
  CHECK(x[15] == doctest::Approx(1.0 / std::sqrt(18.0)).epsilon(1e-12));
  CHECK(x[16] == 0.125);
  CHECK(x[17] == 3.0);  // kernel methods, graphs, ranking
  CHECK(x[18] == 2.0);  // "Kernel--Methods" squeezes onto "kernel methods"
  CHECK(x[19] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(x[20] == doctest::Approx(2.0 / std::sqrt(6.0)).epsilon(1e-12));
  CHECK(x[21] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("identical titles and absent attributes hit the extremes") {
  const Corpus corpus = feature_corpus();
  const FeatureVector x = extract_features(corpus, {"p1", 0}, "c2");
  CHECK(x[0] == 1.0);
  CHECK(x[2] == 0.0);  // solo paper: no coauthors at all
  CHECK(x[5] == 0.0);  // 0/0 ratios collapse to zero
  CHECK(x[7] == 0.0);
  CHECK(x[8] == 0.0);  // empty affiliation bag
  CHECK(x[9] == 0.0);
  CHECK(x[12] == 0.0);
  CHECK(x[13] == 0.0);
  CHECK(x[14] == 0.0);
  CHECK(x[15] == doctest::Approx(1.0).epsilon(1e-12));  // verbatim title reuse
  CHECK(x[16] == 1.0);
  CHECK(x[17] == 0.0);
  CHECK(x[20] == 0.0);
  CHECK(x[21] == 0.0);
}

TEST_CASE("profile order never changes the features") {
  Corpus corpus = feature_corpus();
  const FeatureVector forward = extract_features(corpus, {"p1", 0}, "c1");
  std::reverse(corpus.persons["c1"].papers.begin(), corpus.persons["c1"].papers.end());
  const FeatureVector reversed = extract_features(corpus, {"p1", 0}, "c1");
  for (int i = 0; i < kFeatureCount; ++i) CHECK(forward[i] == reversed[i]);
}

TEST_CASE("features stay in their ranges on generated data") {
  SynthConfig cfg;
  cfg.num_names = 2;
  cfg.persons_per_name = 2;
  cfg.papers_per_person = 5;
  const Corpus corpus = gen_synthetic(cfg, 11);
  const std::vector<int> unit = {4, 5, 7, 8, 9, 12, 13, 14, 15, 16, 19, 20, 21};
  for (const auto& [pid, paper] : corpus.papers)
    for (int slot = 0; slot < static_cast<int>(paper.authors.size()); ++slot)
      for (const auto& [person, rec] : corpus.persons) {
        const FeatureVector x = extract_features(corpus, {pid, slot}, person);
        for (int i : unit) {
          CHECK(x[static_cast<size_t>(i)] >= 0.0);
          CHECK(x[static_cast<size_t>(i)] <= 1.0);
        }
        CHECK(x[3] <= x[1]);  // shared coauthors are a subset of either side
        CHECK(x[3] <= x[2]);
        CHECK(x[6] <= x[0]);
        CHECK(x[11] <= x[0]);
      }
}

TEST_CASE("feature extraction validates its references") {
  Corpus corpus = feature_corpus();
  CHECK_THROWS_AS(extract_features(corpus, {"p404", 0}, "c1"), DataError);
  CHECK_THROWS_AS(extract_features(corpus, {"p1", 2}, "c1"), DataError);
  CHECK_THROWS_AS(extract_features(corpus, {"p1", -1}, "c1"), DataError);
  CHECK_THROWS_AS(extract_features(corpus, {"p1", 0}, "ghost"), DataError);
  corpus.persons["c1"].papers.push_back("p404");
  CHECK_THROWS_AS(extract_features(corpus, {"p1", 0}, "c1"), DataError);
}

TEST_CASE("the csv carries the fixed header and full-precision values") {
  const Corpus corpus = feature_corpus();
  FeatureRow r1{{"p1", 0}, "c1", 1, extract_features(corpus, {"p1", 0}, "c1")};
  FeatureRow r2{{"p1", 0}, "c2", 0, extract_features(corpus, {"p1", 0}, "c2")};
  const std::string path = (testutil::scratch_dir("features_csv") / "rows.csv").string();
  write_features_csv({r1, r2}, path);

  std::ifstream in(path);
  std::string header;
  REQUIRE(std::getline(in, header));
  std::string expect = "paper_id,author_index,person,label";
  for (const std::string& name : feature_names()) expect += "," + name;
  CHECK(header == expect);

  std::string line;
  REQUIRE(std::getline(in, line));
  std::vector<std::string> cols;
  std::stringstream ss(line);
  for (std::string col; std::getline(ss, col, ',');) cols.push_back(col);
  REQUIRE(cols.size() == 4 + kFeatureCount);
  CHECK(cols[0] == "p1");
  CHECK(cols[1] == "0");
  CHECK(cols[2] == "c1");
  CHECK(cols[3] == "1");
  CHECK(std::stod(cols[4]) == r1.x[0]);
  CHECK(std::stod(cols[4 + 8]) == r1.x[8]);  // 17 significant digits round-trip
  REQUIRE(std::getline(in, line));
  CHECK_FALSE(std::getline(in, line));

  CHECK_THROWS_AS(write_features_csv({r1}, "/nonexistent_dir_zz/x.csv"), DataError);
}

TEST_CASE("regression trees route on thresholds and models add shrunk outputs") {
  RegressionTree t;
  t.nodes.resize(3);
  t.nodes[0] = {0, 5.0, 1, 2, 0.0};
  t.nodes[1] = {-1, 0.0, -1, -1, -1.0};
  t.nodes[2] = {-1, 0.0, -1, -1, 1.0};
  FeatureVector x{};
  x[0] = 3.0;
  CHECK(t(x) == -1.0);
  x[0] = 5.0;  // boundary goes left
  CHECK(t(x) == -1.0);
  x[0] = 6.0;
  CHECK(t(x) == 1.0);

  BoostedModel m;
  m.prior = 0.5;
  m.shrinkage = 0.1;
  m.trees = {t};
  CHECK(m.raw_score(x) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(m.probability(x) == doctest::Approx(1.0 / (1.0 + std::exp(-0.6))).epsilon(1e-12));
}

TEST_CASE("zero boosting rounds predict the training base rate") {
  std::vector<FeatureVector> xs(20);
  std::vector<int> ys(20);
  for (int i = 0; i < 20; ++i) {
    xs[static_cast<size_t>(i)][0] = i;
    ys[static_cast<size_t>(i)] = i < 12 ? 1 : 0;
  }
  BoostConfig cfg;
  cfg.rounds = 0;
  const BoostedModel m = train_boosted(xs, ys, cfg);
  CHECK(m.trees.empty());
  CHECK(m.prior == doctest::Approx(std::log(12.0 / 8.0)).epsilon(1e-12));
  CHECK(m.probability(xs[0]) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("boosting separates a clean threshold and is reproducible") {
  std::vector<FeatureVector> xs(20);
  std::vector<int> ys(20);
  for (int i = 0; i < 20; ++i) {
    xs[static_cast<size_t>(i)][0] = i;
    xs[static_cast<size_t>(i)][3] = (i * 7) % 5;  // uninformative distractor
    ys[static_cast<size_t>(i)] = i >= 10 ? 1 : 0;
  }
  BoostConfig cfg;
  cfg.rounds = 10;
  cfg.depth = 2;
  cfg.shrinkage = 0.5;
  const BoostedModel a = train_boosted(xs, ys, cfg);
  REQUIRE(a.trees.size() == 10);

  double pos_mean = 0.0, neg_mean = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double p = a.probability(xs[static_cast<size_t>(i)]);
    CHECK((p > 0.5 ? 1 : 0) == ys[static_cast<size_t>(i)]);
    (ys[static_cast<size_t>(i)] == 1 ? pos_mean : neg_mean) += p / 10.0;
  }
  CHECK(pos_mean > neg_mean);

  const BoostedModel b = train_boosted(xs, ys, cfg);
  for (int i = 0; i < 20; ++i)
    CHECK(a.probability(xs[static_cast<size_t>(i)]) == b.probability(xs[static_cast<size_t>(i)]));
}

TEST_CASE("boosting rejects degenerate configs and data") {
  std::vector<FeatureVector> xs(4);
  std::vector<int> ys = {0, 1, 0, 1};
  for (int i = 0; i < 4; ++i) xs[static_cast<size_t>(i)][0] = i;
  BoostConfig cfg;
  cfg.rounds = -1;
  CHECK_THROWS_AS(train_boosted(xs, ys, cfg), ConfigError);
  cfg = BoostConfig{};
  cfg.depth = 0;
  CHECK_THROWS_AS(train_boosted(xs, ys, cfg), ConfigError);
  cfg = BoostConfig{};
  cfg.shrinkage = 0.0;
  CHECK_THROWS_AS(train_boosted(xs, ys, cfg), ConfigError);
  cfg = BoostConfig{};
  cfg.min_leaf = 0;
  CHECK_THROWS_AS(train_boosted(xs, ys, cfg), ConfigError);
  cfg = BoostConfig{};
  CHECK_THROWS_AS(train_boosted(xs, {0, 1, 0}, cfg), DataError);
  CHECK_THROWS_AS(train_boosted({}, {}, cfg), DataError);
  CHECK_THROWS_AS(train_boosted(xs, {0, 1, 0, 2}, cfg), DataError);
  CHECK_THROWS_AS(train_boosted(xs, {1, 1, 1, 1}, cfg), DataError);
}

TEST_CASE("the fitted cut is optimal and ties keep the smallest theta") {
  // closed forms first
  ThresholdChoice c = fit_threshold({1.0, 2.0}, {1, 1});
  CHECK(c.theta == 0.0);  // accept everything via min - 1
  CHECK(c.accuracy == 1.0);
  c = fit_threshold({0.0, 1.0}, {0, 1});
  CHECK(c.theta == 0.5);
  CHECK(c.accuracy == 1.0);
  c = fit_threshold({0.0, 1.0}, {1, 0});  // hopeless: ties resolve low
  CHECK(c.theta == -1.0);
  CHECK(c.accuracy == 0.5);
  c = fit_threshold({3.0, 3.0}, {1, 0});
  CHECK(c.theta == 2.0);
  CHECK(c.accuracy == 0.5);

  // optimality against brute-force probes on seeded fixtures
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 38);
    std::vector<double> scores(static_cast<size_t>(n));
    std::vector<int> labels(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      // one-decimal grid so duplicates and ties actually occur
      scores[static_cast<size_t>(i)] = static_cast<double>(static_cast<int>(rng() % 41) - 20) / 10.0;
      labels[static_cast<size_t>(i)] = static_cast<int>(rng() % 2);
    }
    const ThresholdChoice best = fit_threshold(scores, labels);
    CHECK(accuracy_at(scores, labels, best.theta) == best.accuracy);

    std::vector<double> probes(scores);
    std::sort(probes.begin(), probes.end());
    probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
    std::vector<double> cuts = {probes.front() - 1.0, probes.back() + 1.0};
    for (size_t i = 0; i + 1 < probes.size(); ++i)
      cuts.push_back(0.5 * (probes[i] + probes[i + 1]));
    for (double cut : cuts) {
      const double acc = accuracy_at(scores, labels, cut);
      CHECK(acc <= best.accuracy);
      // ties resolve to the smallest of the swept cuts, not of all reals
      if (acc == best.accuracy) CHECK(best.theta <= cut + 1e-12);
    }
    std::uniform_real_distribution<double> extra(-3.0, 3.0);
    for (int k = 0; k < 200; ++k)
      CHECK(accuracy_at(scores, labels, extra(rng)) <= best.accuracy);
  }

  CHECK_THROWS_AS(fit_threshold({}, {}), DataError);
  CHECK_THROWS_AS(fit_threshold({1.0}, {1, 0}), DataError);
  CHECK_THROWS_AS(fit_threshold({1.0}, {7}), DataError);
}

TEST_CASE("feature rows label the gold person and nothing else") {
  SynthConfig cfg;
  cfg.num_names = 2;
  cfg.persons_per_name = 2;
  cfg.papers_per_person = 4;
  const Corpus corpus = gen_synthetic(cfg, 13);
  const SplitResult split = split_corpus(corpus, 0.3, 0.3, 5);
  std::vector<CandidateSet> sets =
      build_candidate_sets(split.corpus, split.train_targets, CandidateMode::variants);
  const std::vector<CandidateSet> nils = make_nil_variants(sets);
  sets.insert(sets.end(), nils.begin(), nils.end());

  const std::vector<FeatureRow> rows = feature_rows(split.corpus, sets);
  size_t expect_rows = 0, expect_pos = 0;
  for (const CandidateSet& s : sets) {
    expect_rows += s.candidates.size();
    if (s.gold == GoldKind::person)
      expect_pos += static_cast<size_t>(std::count(s.candidates.begin(), s.candidates.end(),
                                                   s.gold_person));
  }
  REQUIRE(rows.size() == expect_rows);
  size_t pos = 0;
  for (const FeatureRow& row : rows) pos += static_cast<size_t>(row.label);
  CHECK(pos == expect_pos);
  CHECK(pos > 0);

  const FeatureRow& first = rows.front();
  const FeatureVector direct = extract_features(split.corpus, first.target, first.person);
  for (int i = 0; i < kFeatureCount; ++i) CHECK(first.x[static_cast<size_t>(i)] == direct[i]);
}

TEST_CASE("score cuts at the extremes accept or reject every top candidate") {
  SynthConfig cfg;
  cfg.num_names = 2;
  cfg.persons_per_name = 2;
  cfg.papers_per_person = 4;
  const Corpus corpus = gen_synthetic(cfg, 17);
  const SplitResult split = split_corpus(corpus, 0.3, 0.3, 9);
  SkipgramConfig scfg;
  scfg.dim = 8;
  scfg.epochs = 1;
  const EmbTables tables = train_embeddings(split.corpus, {}, scfg);
  MatcherInitConfig icfg;
  icfg.hidden = {8};
  const MatcherParams matcher = init_matcher(tables, icfg);
  MatchContext ctx(split.corpus, matcher.names.vocab, matcher.words.vocab);

  std::vector<CandidateSet> sets =
      build_candidate_sets(split.corpus, split.test_targets, CandidateMode::variants);
  const std::vector<CandidateSet> nils = make_nil_variants(sets);
  sets.insert(sets.end(), nils.begin(), nils.end());
  REQUIRE(!sets.empty());

  const SliceEval accept_all = evaluate_threshold(ctx, matcher, -1e9, sets);
  CHECK(accept_all.confusion.fn == 0);
  CHECK(accept_all.confusion.tn == 0);
  CHECK(accept_all.confusion.tp + accept_all.confusion.fp ==
        static_cast<long>(sets.size()));

  const SliceEval reject_all = evaluate_threshold(ctx, matcher, 1e9, sets);
  CHECK(reject_all.confusion.tp == 0);
  CHECK(reject_all.confusion.fp == 0);
  CHECK(reject_all.confusion.tn == static_cast<long>(reject_all.n_nil));
  CHECK(reject_all.hr1 == accept_all.hr1);  // the cut never reorders the ranking

  std::vector<double> scores;
  std::vector<int> top_labels;
  collect_top_scores(ctx, matcher, sets, scores, top_labels);
  REQUIRE(scores.size() == sets.size());
  REQUIRE(top_labels.size() == scores.size());
  for (size_t i = 0; i < sets.size(); ++i) {
    CHECK((top_labels[i] == 0 || top_labels[i] == 1));
    if (sets[i].gold == GoldKind::nil) CHECK(top_labels[i] == 0);
  }
  const ThresholdChoice cut = fit_threshold(scores, top_labels);
  CHECK(cut.accuracy >= 0.5);  // predicting the majority class is always available
}

TEST_CASE("boosted ranking breaks probability ties by person id") {
  const Corpus corpus = feature_corpus();
  CandidateSet s;
  s.target = {"p1", 0};
  s.candidates = {"c2", "c1"};
  s.gold = GoldKind::person;
  s.gold_person = "c1";
  CandidateSet empty;
  empty.target = {"p1", 0};
  empty.gold = GoldKind::person;
  empty.gold_person = "c1";

  BoostedModel accept;  // flat positive prior: everyone scores sigmoid(2)
  accept.prior = 2.0;
  const SliceEval acc = evaluate_boosted(corpus, accept, {s, empty});
  CHECK(acc.n_pos == 2);
  CHECK(acc.gold_missing == 1);  // the empty list never holds the gold person
  CHECK(acc.confusion.tp == 1);  // tie on p, "c1" < "c2", top is gold, accepted
  CHECK(acc.confusion.fn == 1);  // empty list counts as a rejection
  CHECK(acc.hr1 == 0.5);

  BoostedModel reject;
  reject.prior = -2.0;
  const SliceEval rej = evaluate_boosted(corpus, reject, {s, empty});
  CHECK(rej.confusion.tp == 0);
  CHECK(rej.confusion.fn == 2);
}
