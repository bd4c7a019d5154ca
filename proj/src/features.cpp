#include "nameres/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "nameres/candidates.hpp"
#include "nameres/errors.hpp"
#include "nameres/names.hpp"
#include "nameres/tokens.hpp"

namespace nameres {

const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names = {
      "paper_count",
      "target_coauthor_count",
      "candidate_coauthor_count",
      "same_coauthor_count",
      "same_coauthor_ratio_target",
      "same_coauthor_ratio_candidate",
      "affiliation_match_count",
      "affiliation_match_ratio",
      "affiliation_cosine",
      "affiliation_jaccard",
      "distinct_venue_count",
      "venue_match_count",
      "venue_match_ratio",
      "venue_cosine",
      "venue_jaccard",
      "title_cosine",
      "title_jaccard",
      "distinct_keyword_count",
      "keyword_match_count",
      "keyword_match_ratio",
      "keyword_cosine",
      "keyword_jaccard",
  };
  return names;
}

namespace {

/// Lowercase, squeeze every punctuation/whitespace run to one space, trim.
std::string squeeze(const std::string& raw) {
  std::string out;
  bool pending_space = false;
  for (char ch : raw) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    } else {
      pending_space = true;
    }
  }
  return out;
}

using Counts = std::map<std::string, int>;

void add_all(Counts& counts, const std::vector<std::string>& tokens) {
  for (const std::string& t : tokens) ++counts[t];
}

double cosine(const Counts& a, const Counts& b) {
  if (a.empty() || b.empty()) return 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [t, n] : a) {
    na += static_cast<double>(n) * n;
    auto it = b.find(t);
    if (it != b.end()) dot += static_cast<double>(n) * it->second;
  }
  for (const auto& [t, n] : b) nb += static_cast<double>(n) * n;
  if (dot == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double jaccard(const Counts& a, const Counts& b) {
  if (a.empty() && b.empty()) return 0.0;
  size_t inter = 0;
  for (const auto& [t, n] : a) inter += b.count(t);
  const size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double ratio(double num, double denom) { return denom > 0.0 ? num / denom : 0.0; }

}  // namespace

FeatureVector extract_features(const Corpus& corpus, const TargetPair& target,
                               const std::string& person_id) {
  auto pit = corpus.papers.find(target.paper_id);
  if (pit == corpus.papers.end())
    throw DataError("unknown paper \"" + target.paper_id + "\"");
  const PaperRecord& p = pit->second;
  if (target.author_index < 0 || target.author_index >= static_cast<int>(p.authors.size()))
    throw DataError("author index " + std::to_string(target.author_index) +
                    " outside paper \"" + target.paper_id + "\"");
  auto cit = corpus.persons.find(person_id);
  if (cit == corpus.persons.end()) throw DataError("unknown person \"" + person_id + "\"");
  const PersonRecord& c = cit->second;

  // Target side: the other author names on p, the target author's
  // affiliation, and p's venue/title/keywords.
  std::set<std::string> a_coauthors;
  for (size_t i = 0; i < p.authors.size(); ++i) {
    if (static_cast<int>(i) == target.author_index) continue;
    if (p.authors[i].name.empty()) continue;
    a_coauthors.insert(joined(normalize_name(p.authors[i].name)));
  }
  const std::string a_org = squeeze(p.authors[static_cast<size_t>(target.author_index)].org);
  const std::string p_venue = squeeze(p.venue);
  Counts a_org_tokens, p_venue_tokens, p_title_tokens, p_keywords;
  add_all(a_org_tokens, content_tokens(p.authors[static_cast<size_t>(target.author_index)].org));
  add_all(p_venue_tokens, content_tokens(p.venue));
  add_all(p_title_tokens, content_tokens(p.title));
  std::set<std::string> p_keyword_set;
  for (const std::string& kw : p.keywords) {
    const std::string k = squeeze(kw);
    if (k.empty()) continue;
    ++p_keywords[k];
    p_keyword_set.insert(k);
  }

  // Candidate side, aggregated over the profile with the target's own paper
  // left out.
  std::set<std::string> c_coauthors, c_venues;
  Counts c_org_tokens, c_venue_tokens, c_title_tokens, c_keywords;
  int papers = 0;
  int org_match = 0, orgs_present = 0;
  int venue_match = 0, venues_present = 0;
  int kw_match = 0, kw_total = 0;
  for (const std::string& paper_id : c.papers) {
    if (paper_id == target.paper_id) continue;
    auto it = corpus.papers.find(paper_id);
    if (it == corpus.papers.end())
      throw DataError("person \"" + person_id + "\" lists unknown paper \"" + paper_id + "\"");
    const PaperRecord& q = it->second;
    ++papers;

    const std::optional<int> slot = person_slot(q, c.name);
    for (size_t i = 0; i < q.authors.size(); ++i) {
      if (slot && static_cast<int>(i) == *slot) continue;
      if (q.authors[i].name.empty()) continue;
      c_coauthors.insert(joined(normalize_name(q.authors[i].name)));
    }
    if (slot) {
      const std::string& org = q.authors[static_cast<size_t>(*slot)].org;
      const std::string org_n = squeeze(org);
      if (!org_n.empty()) {
        ++orgs_present;
        if (org_n == a_org && !a_org.empty()) ++org_match;
      }
      add_all(c_org_tokens, content_tokens(org));
    }

    const std::string venue_n = squeeze(q.venue);
    if (!venue_n.empty()) {
      ++venues_present;
      c_venues.insert(venue_n);
      if (venue_n == p_venue && !p_venue.empty()) ++venue_match;
    }
    add_all(c_venue_tokens, content_tokens(q.venue));
    add_all(c_title_tokens, content_tokens(q.title));
    for (const std::string& kw : q.keywords) {
      const std::string k = squeeze(kw);
      if (k.empty()) continue;
      ++c_keywords[k];
      ++kw_total;
      if (p_keyword_set.count(k)) ++kw_match;
    }
  }

  std::set<std::string> same;
  std::set_intersection(a_coauthors.begin(), a_coauthors.end(), c_coauthors.begin(),
                        c_coauthors.end(), std::inserter(same, same.begin()));

  FeatureVector x{};
  x[0] = papers;
  x[1] = static_cast<double>(a_coauthors.size());
  x[2] = static_cast<double>(c_coauthors.size());
  x[3] = static_cast<double>(same.size());
  x[4] = ratio(x[3], x[1]);
  x[5] = ratio(x[3], x[2]);
  x[6] = org_match;
  x[7] = ratio(x[6], orgs_present);
  x[8] = cosine(a_org_tokens, c_org_tokens);
  x[9] = jaccard(a_org_tokens, c_org_tokens);
  x[10] = static_cast<double>(c_venues.size());
  x[11] = venue_match;
  x[12] = ratio(x[11], venues_present);
  x[13] = cosine(p_venue_tokens, c_venue_tokens);
  x[14] = jaccard(p_venue_tokens, c_venue_tokens);
  x[15] = cosine(p_title_tokens, c_title_tokens);
  x[16] = jaccard(p_title_tokens, c_title_tokens);
  x[17] = static_cast<double>(c_keywords.size());
  x[18] = kw_match;
  x[19] = ratio(x[18], kw_total);
  x[20] = cosine(p_keywords, c_keywords);
  x[21] = jaccard(p_keywords, c_keywords);
  return x;
}

void write_features_csv(const std::vector<FeatureRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write \"" + path + "\"");
  out << "paper_id,author_index,person,label";
  for (const std::string& name : feature_names()) out << "," << name;
  out << "\n";
  out.precision(17);
  for (const FeatureRow& row : rows) {
    out << row.target.paper_id << "," << row.target.author_index << "," << row.person << ","
        << row.label;
    for (double v : row.x) out << "," << v;
    out << "\n";
  }
  if (!out) throw DataError("short write to \"" + path + "\"");
}

}  // namespace nameres
