#include "nameres/candidates.hpp"

#include <algorithm>
#include <set>

#include "nameres/errors.hpp"
#include "nameres/names.hpp"

namespace nameres {

namespace {

const PaperRecord& paper_of(const Corpus& corpus, const TargetPair& target) {
  auto it = corpus.papers.find(target.paper_id);
  if (it == corpus.papers.end())
    throw DataError("target references missing paper \"" + target.paper_id + "\"");
  const PaperRecord& paper = it->second;
  if (target.author_index < 0 || target.author_index >= static_cast<int>(paper.authors.size()))
    throw DataError("target author index out of range for paper \"" + target.paper_id + "\"");
  return paper;
}

}  // namespace

std::vector<std::string> find_candidates(const Corpus& corpus, const TargetPair& target,
                                         CandidateMode mode) {
  const PaperRecord& paper = paper_of(corpus, target);
  const NormalizedName author = normalize_name(paper.authors[target.author_index].name);

  std::vector<std::string> out;
  if (mode == CandidateMode::variants) {
    for (const NormalizedName& v : name_variants(author)) {
      auto it = corpus.name_index.find(joined(v));
      if (it == corpus.name_index.end()) continue;
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
  } else {
    const std::string surface = joined(author);
    for (const auto& [id, person] : corpus.persons) {
      if (jaro_winkler(surface, joined(normalize_name(person.name))) > 0.5) out.push_back(id);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<int> person_slot(const PaperRecord& paper, const std::string& display_name) {
  const NormalizedName person_name = normalize_name(display_name);
  const auto person_variants = name_variants(person_name);
  for (size_t i = 0; i < paper.authors.size(); ++i) {
    NormalizedName slot = normalize_name(paper.authors[i].name);
    if (person_variants.count(slot)) return static_cast<int>(i);
    if (name_variants(slot).count(person_name)) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::vector<int> shared_coauthor_counts(const Corpus& corpus, const TargetPair& target,
                                        const std::vector<std::string>& candidates) {
  const PaperRecord& paper = paper_of(corpus, target);

  std::set<std::string> target_coauthors;
  for (size_t i = 0; i < paper.authors.size(); ++i) {
    if (static_cast<int>(i) == target.author_index) continue;
    target_coauthors.insert(joined(normalize_name(paper.authors[i].name)));
  }

  std::vector<int> counts;
  counts.reserve(candidates.size());
  for (const std::string& cid : candidates) {
    auto it = corpus.persons.find(cid);
    if (it == corpus.persons.end()) throw DataError("unknown candidate person \"" + cid + "\"");
    const PersonRecord& person = it->second;
    std::set<std::string> coauthors;
    for (const std::string& pid : person.papers) {
      if (pid == target.paper_id) continue;
      const PaperRecord& pp = corpus.papers.at(pid);
      std::optional<int> self = person_slot(pp, person.name);
      for (size_t i = 0; i < pp.authors.size(); ++i) {
        if (self && static_cast<int>(i) == *self) continue;
        coauthors.insert(joined(normalize_name(pp.authors[i].name)));
      }
    }
    int shared = 0;
    for (const std::string& name : target_coauthors) shared += coauthors.count(name) ? 1 : 0;
    counts.push_back(shared);
  }
  return counts;
}

double same_coauthor_ratio(const Corpus& corpus, const TargetPair& target,
                           const std::vector<std::string>& candidates) {
  if (candidates.size() < 2)
    throw DataError("same-coauthor ratio needs at least two candidates");
  std::vector<int> counts = shared_coauthor_counts(corpus, target, candidates);
  std::vector<int> sorted = counts;
  std::sort(sorted.begin(), sorted.end(), std::greater<int>());
  const int max = sorted.front();
  const int second = sorted[1];  // duplicates count: a tie at the top zeroes the numerator
  const int min = sorted.back();
  if (max == min) return 0.0;
  return static_cast<double>(max - second) / static_cast<double>(max - min);
}

}  // namespace nameres
