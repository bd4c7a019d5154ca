#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nameres/candidates.hpp"
#include "nameres/corpus.hpp"
#include "nameres/errors.hpp"
#include "nameres/names.hpp"
#include "nameres/rng.hpp"

using namespace nameres;

namespace {

Corpus load_text(const std::string& text) {
  std::istringstream in(text);
  return load_corpus(in, "<test>");
}

/// Brute-force restatement of the separation ratio, written directly from
/// the definition: per candidate, count distinct coauthor names (profile
/// minus the target's own paper, candidate's own slot excluded) that also
/// appear beside the target; then (max - second) / (max - min), duplicates
/// kept in the second place.
double ratio_oracle(const Corpus& corpus, const TargetPair& target,
                    const std::vector<std::string>& candidates) {
  const PaperRecord& tp = corpus.papers.at(target.paper_id);
  std::set<std::string> beside;
  for (size_t i = 0; i < tp.authors.size(); ++i)
    if (static_cast<int>(i) != target.author_index)
      beside.insert(joined(normalize_name(tp.authors[i].name)));

  std::vector<int> counts;
  for (const std::string& cid : candidates) {
    const PersonRecord& person = corpus.persons.at(cid);
    std::set<std::string> seen;
    for (const std::string& pid : person.papers) {
      if (pid == target.paper_id) continue;
      const PaperRecord& pp = corpus.papers.at(pid);
      const std::optional<int> own = person_slot(pp, person.name);
      for (size_t i = 0; i < pp.authors.size(); ++i) {
        if (own && static_cast<int>(i) == *own) continue;
        const std::string name = joined(normalize_name(pp.authors[i].name));
        if (beside.count(name)) seen.insert(name);
      }
    }
    counts.push_back(static_cast<int>(seen.size()));
  }

  std::vector<int> sorted = counts;
  std::sort(sorted.rbegin(), sorted.rend());
  if (sorted.front() == sorted.back()) return 0.0;
  return static_cast<double>(sorted[0] - sorted[1]) /
         static_cast<double>(sorted.front() - sorted.back());
}

/// Random planted corpus: persons named "first0 last0", coauthor pools drawn
/// so shared-coauthor counts vary between candidates.
Corpus random_fixture(Rng& rng, int persons, int papers_each, int coauthor_pool) {
  SynthConfig cfg;
  cfg.num_names = 1;
  cfg.persons_per_name = persons;
  cfg.papers_per_person = papers_each;
  cfg.clique = coauthor_pool;
  cfg.coauthor_overlap = 0.5;  // shared slots make counts collide across candidates
  return gen_synthetic(cfg, rng.next_u64());
}

}  // namespace

TEST_CASE("variant candidates cover rotated and initialed name forms") {
  const Corpus corpus = load_text(R"({
    "papers": [
      {"id": "p1", "title": "t", "year": 1,
       "authors": [{"name": "Jing Zhang"}, {"name": "Hui Xue"}]},
      {"id": "p2", "title": "t", "year": 1, "authors": [{"name": "Zhang Jing"}]},
      {"id": "p3", "title": "t", "year": 1, "authors": [{"name": "J Zhang"}]},
      {"id": "p4", "title": "t", "year": 1, "authors": [{"name": "Wei Wang"}]}
    ],
    "persons": [
      {"id": "a1", "name": "Jing Zhang", "papers": ["p1"]},
      {"id": "a2", "name": "Zhang Jing", "papers": ["p2"]},
      {"id": "a3", "name": "J Zhang", "papers": ["p3"]},
      {"id": "a4", "name": "Wei Wang", "papers": ["p4"]}
    ]
  })");
  const TargetPair target{"p1", 0};
  const std::vector<std::string> got = find_candidates(corpus, target);
  CHECK(got == std::vector<std::string>{"a1", "a2", "a3"});
}

TEST_CASE("the jaro-winkler fallback admits near-miss spellings") {
  const Corpus corpus = load_text(R"({
    "papers": [
      {"id": "p1", "title": "t", "year": 1, "authors": [{"name": "Jonathan Smith"}]},
      {"id": "p2", "title": "t", "year": 1, "authors": [{"name": "Jonathon Smith"}]},
      {"id": "p3", "title": "t", "year": 1, "authors": [{"name": "Qi Yu"}]}
    ],
    "persons": [
      {"id": "a1", "name": "Jonathan Smith", "papers": ["p1"]},
      {"id": "a2", "name": "Jonathon Smith", "papers": ["p2"]},
      {"id": "a3", "name": "Qi Yu", "papers": ["p3"]}
    ]
  })");
  const TargetPair target{"p1", 0};
  // exact-variant matching cannot reach the alternate spelling
  CHECK(find_candidates(corpus, target, CandidateMode::variants) ==
        std::vector<std::string>{"a1"});
  const auto fallback = find_candidates(corpus, target, CandidateMode::jaro_winkler);
  CHECK(std::find(fallback.begin(), fallback.end(), "a2") != fallback.end());
  CHECK(std::find(fallback.begin(), fallback.end(), "a3") == fallback.end());
}

TEST_CASE("candidate lookup validates the target") {
  const Corpus corpus = gen_synthetic(SynthConfig{}, 1);
  CHECK_THROWS_AS(find_candidates(corpus, TargetPair{"nope", 0}), DataError);
  const std::string some = corpus.papers.begin()->first;
  CHECK_THROWS_AS(find_candidates(corpus, TargetPair{some, 99}), DataError);
  CHECK_THROWS_AS(find_candidates(corpus, TargetPair{some, -1}), DataError);
}

TEST_CASE("person_slot sees through name variants in both directions") {
  const Corpus corpus = load_text(R"({
    "papers": [
      {"id": "p1", "title": "t", "year": 1,
       "authors": [{"name": "Hui Xue"}, {"name": "Zhang Jing"}]}
    ],
    "persons": [{"id": "a1", "name": "Jing Zhang", "papers": ["p1"]}]
  })");
  CHECK(person_slot(corpus.papers.at("p1"), "Jing Zhang") == 1);
  CHECK(person_slot(corpus.papers.at("p1"), "J Zhang") == 1);
  CHECK(person_slot(corpus.papers.at("p1"), "Wei Wang") == std::nullopt);
}

TEST_CASE("separation ratio matches brute-force enumeration on random fixtures") {
  Rng rng(404);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int persons = 2 + static_cast<int>(rng.below(5));
    const Corpus corpus = random_fixture(rng, persons, 3 + static_cast<int>(rng.below(4)), 5);

    std::vector<std::string> candidates;
    for (const auto& [id, person] : corpus.persons) candidates.push_back(id);

    // any occurrence works as a target; pick one at random
    std::vector<std::string> papers;
    for (const auto& [id, p] : corpus.papers) papers.push_back(id);
    const std::string pid = papers[rng.below(papers.size())];
    const int slot = static_cast<int>(rng.below(corpus.papers.at(pid).authors.size()));
    const TargetPair target{pid, slot};

    const double got = same_coauthor_ratio(corpus, target, candidates);
    const double want = ratio_oracle(corpus, target, candidates);
    CHECK(got == want);  // same integer arithmetic; exact equality expected
    ++checked;
  }
  CHECK(checked == 50);
}

TEST_CASE("a tie at the top zeroes the ratio numerator") {
  // two candidates sharing the same best count -> second == max -> ratio 0;
  // all equal -> max == min -> defined as 0 outright
  const Corpus corpus = load_text(R"({
    "papers": [
      {"id": "t", "title": "x", "year": 1,
       "authors": [{"name": "Jing Zhang"}, {"name": "Bo Li"}, {"name": "Yu Chen"}]},
      {"id": "q1", "title": "x", "year": 1,
       "authors": [{"name": "Jing Zhang"}, {"name": "Bo Li"}, {"name": "Yu Chen"}]},
      {"id": "q2", "title": "x", "year": 1,
       "authors": [{"name": "Jing Zhang"}, {"name": "Bo Li"}, {"name": "Yu Chen"}]},
      {"id": "q3", "title": "x", "year": 1,
       "authors": [{"name": "Jing Zhang"}, {"name": "Bo Li"}]}
    ],
    "persons": [
      {"id": "a1", "name": "Jing Zhang", "papers": ["q1"]},
      {"id": "a2", "name": "Jing Zhang", "papers": ["q2"]},
      {"id": "a3", "name": "Jing Zhang", "papers": ["q3"]}
    ]
  })");
  const TargetPair target{"t", 0};
  const std::vector<int> counts =
      shared_coauthor_counts(corpus, target, {"a1", "a2", "a3"});
  CHECK(counts == std::vector<int>{2, 2, 1});
  // sorted {2,2,1}: (max - second) / (max - min) = (2-2)/(2-1)
  CHECK(same_coauthor_ratio(corpus, target, {"a1", "a2", "a3"}) == 0.0);
  // identical counts: max == min
  CHECK(same_coauthor_ratio(corpus, target, {"a1", "a2"}) == 0.0);
  CHECK_THROWS_AS(same_coauthor_ratio(corpus, target, {"a1"}), DataError);
}

TEST_CASE("candidate profiles never count the target paper itself") {
  // the candidate's only other paper shares one coauthor; the target paper
  // itself (in the profile) must not inflate the count
  const Corpus corpus = load_text(R"({
    "papers": [
      {"id": "t", "title": "x", "year": 1,
       "authors": [{"name": "Jing Zhang"}, {"name": "Bo Li"}, {"name": "Yu Chen"}]},
      {"id": "q", "title": "x", "year": 1,
       "authors": [{"name": "Jing Zhang"}, {"name": "Bo Li"}]}
    ],
    "persons": [{"id": "a1", "name": "Jing Zhang", "papers": ["t", "q"]}]
  })");
  const std::vector<int> counts = shared_coauthor_counts(corpus, TargetPair{"t", 0}, {"a1"});
  CHECK(counts == std::vector<int>{1});
}
