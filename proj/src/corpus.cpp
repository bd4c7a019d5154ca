#include "nameres/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nameres/errors.hpp"
#include "nameres/names.hpp"
#include "nameres/rng.hpp"

namespace nameres {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) throw DataError("unknown key \"" + it.key() + "\" in " + where);
  }
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError("missing key \"" + std::string(key) + "\" in " + where);
  if (!it->is_string()) throw DataError("key \"" + std::string(key) + "\" in " + where + " is not a string");
  return it->get<std::string>();
}

std::string optional_string(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return {};
  if (!it->is_string()) throw DataError("key \"" + std::string(key) + "\" in " + where + " is not a string");
  return it->get<std::string>();
}

}  // namespace

void rebuild_name_index(Corpus& corpus) {
  corpus.name_index.clear();
  for (const auto& [id, person] : corpus.persons) {
    corpus.name_index[joined(normalize_name(person.name))].push_back(id);
  }
  // map order already gives sorted ids per key
}

Corpus load_corpus(std::istream& in, const std::string& source_name) {
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(source_name + ": " + e.what());
  }
  if (!root.is_object()) throw DataError(source_name + ": top level is not an object");
  reject_unknown_keys(root, {"papers", "persons"}, "top level");
  if (!root.contains("papers") || !root.contains("persons"))
    throw DataError(source_name + ": top level requires \"papers\" and \"persons\"");

  Corpus corpus;
  for (const json& jp : root.at("papers")) {
    if (!jp.is_object()) throw DataError("paper entry is not an object");
    reject_unknown_keys(jp, {"id", "title", "abstract", "keywords", "venue", "year", "authors"},
                        "paper");
    PaperRecord p;
    p.id = require_string(jp, "id", "paper");
    const std::string where = "paper \"" + p.id + "\"";
    p.title = require_string(jp, "title", where);
    p.abstract = optional_string(jp, "abstract", where);
    p.venue = optional_string(jp, "venue", where);
    if (auto it = jp.find("keywords"); it != jp.end()) {
      if (!it->is_array()) throw DataError("keywords in " + where + " is not an array");
      for (const json& kw : *it) {
        if (!kw.is_string()) throw DataError("keyword in " + where + " is not a string");
        p.keywords.push_back(kw.get<std::string>());
      }
    }
    auto ity = jp.find("year");
    if (ity == jp.end() || !ity->is_number_integer())
      throw DataError("year in " + where + " missing or not an integer");
    p.year = ity->get<int>();
    if (p.year < 0) throw DataError("negative year in " + where);
    auto ita = jp.find("authors");
    if (ita == jp.end() || !ita->is_array() || ita->empty())
      throw DataError("authors in " + where + " missing or empty");
    for (const json& ja : *ita) {
      if (!ja.is_object()) throw DataError("author entry in " + where + " is not an object");
      reject_unknown_keys(ja, {"name", "org"}, "author of " + p.id);
      AuthorSlot slot;
      slot.name = require_string(ja, "name", "author of " + p.id);
      slot.org = optional_string(ja, "org", "author of " + p.id);
      normalize_name(slot.name);  // throws when nothing survives
      p.authors.push_back(std::move(slot));
    }
    if (!corpus.papers.emplace(p.id, std::move(p)).second)
      throw DataError("duplicate paper id \"" + jp.at("id").get<std::string>() + "\"");
  }

  for (const json& jq : root.at("persons")) {
    if (!jq.is_object()) throw DataError("person entry is not an object");
    reject_unknown_keys(jq, {"id", "name", "papers"}, "person");
    PersonRecord q;
    q.id = require_string(jq, "id", "person");
    const std::string where = "person \"" + q.id + "\"";
    q.name = require_string(jq, "name", where);
    normalize_name(q.name);
    auto itp = jq.find("papers");
    if (itp == jq.end() || !itp->is_array() || itp->empty())
      throw DataError("papers in " + where + " missing or empty");
    std::set<std::string> seen;
    for (const json& pid : *itp) {
      if (!pid.is_string()) throw DataError("paper id in " + where + " is not a string");
      std::string s = pid.get<std::string>();
      if (!corpus.papers.count(s))
        throw DataError(where + " references missing paper \"" + s + "\"");
      if (!seen.insert(s).second)
        throw DataError(where + " lists paper \"" + s + "\" twice");
      q.papers.push_back(std::move(s));
    }
    if (!corpus.persons.emplace(q.id, std::move(q)).second)
      throw DataError("duplicate person id \"" + jq.at("id").get<std::string>() + "\"");
  }

  rebuild_name_index(corpus);
  return corpus;
}

Corpus load_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file \"" + path + "\"");
  return load_corpus(in, path);
}

void save_corpus(const Corpus& corpus, std::ostream& out) {
  json root;
  root["papers"] = json::array();
  for (const auto& [id, p] : corpus.papers) {
    json jp;
    jp["id"] = p.id;
    jp["title"] = p.title;
    jp["abstract"] = p.abstract;
    jp["keywords"] = p.keywords;
    jp["venue"] = p.venue;
    jp["year"] = p.year;
    json authors = json::array();
    for (const AuthorSlot& a : p.authors) authors.push_back({{"name", a.name}, {"org", a.org}});
    jp["authors"] = std::move(authors);
    root["papers"].push_back(std::move(jp));
  }
  root["persons"] = json::array();
  for (const auto& [id, q] : corpus.persons) {
    root["persons"].push_back({{"id", q.id}, {"name", q.name}, {"papers", q.papers}});
  }
  out << root.dump(2) << "\n";
}

void save_corpus_file(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus file \"" + path + "\"");
  save_corpus(corpus, out);
}

namespace {

/// First author slot whose normalized name is a variant of the person's
/// display name (or vice versa); -1 when none matches.
int find_person_slot(const PaperRecord& paper, const NormalizedName& person_name) {
  auto person_variants = name_variants(person_name);
  for (size_t i = 0; i < paper.authors.size(); ++i) {
    NormalizedName slot = normalize_name(paper.authors[i].name);
    if (person_variants.count(slot)) return static_cast<int>(i);
    if (name_variants(slot).count(person_name)) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

SplitResult split_corpus(const Corpus& corpus, double person_test_fraction,
                         double paper_holdout_fraction, uint64_t seed) {
  if (person_test_fraction <= 0.0 || person_test_fraction >= 1.0)
    throw ConfigError("person test fraction must lie in (0, 1)");
  if (paper_holdout_fraction <= 0.0 || paper_holdout_fraction >= 1.0)
    throw ConfigError("paper holdout fraction must lie in (0, 1)");

  std::vector<std::string> ids;
  ids.reserve(corpus.persons.size());
  for (const auto& [id, q] : corpus.persons) ids.push_back(id);
  Rng rng(seed);
  rng.shuffle(ids);
  const size_t n_test =
      static_cast<size_t>(std::llround(person_test_fraction * static_cast<double>(ids.size())));
  std::set<std::string> test_persons(ids.begin(), ids.begin() + std::min(n_test, ids.size()));

  SplitResult out;
  out.corpus = corpus;
  for (auto& [id, person] : out.corpus.persons) {
    std::vector<std::string> papers = person.papers;
    std::sort(papers.begin(), papers.end(), [&](const std::string& a, const std::string& b) {
      int ya = corpus.papers.at(a).year, yb = corpus.papers.at(b).year;
      return ya != yb ? ya < yb : a < b;
    });
    const int n = static_cast<int>(papers.size());
    if (n < 2) {
      ++out.skipped_single_paper;
      continue;
    }
    // the epsilon guards against upward float noise in exact products
    int k = static_cast<int>(std::ceil(paper_holdout_fraction * n - 1e-9));
    k = std::min(std::max(k, 1), n - 1);

    person.papers.assign(papers.begin(), papers.end() - k);
    NormalizedName person_name = normalize_name(person.name);
    auto& side = test_persons.count(id) ? out.test_targets : out.train_targets;
    for (int i = n - k; i < n; ++i) {
      const PaperRecord& paper = corpus.papers.at(papers[i]);
      int slot = find_person_slot(paper, person_name);
      if (slot < 0) {
        ++out.skipped_no_slot;
        continue;
      }
      side.push_back({TargetPair{papers[i], slot}, id});
    }
  }
  return out;
}

Corpus gen_synthetic(const SynthConfig& cfg, uint64_t seed) {
  if (cfg.num_names < 1 || cfg.persons_per_name < 1)
    throw ConfigError("synthetic corpus needs at least one name and one person per name");
  if (cfg.papers_per_person < 1) throw ConfigError("papers per person must be positive");
  if (cfg.topic_vocab < 1 || cfg.shared_vocab < 1)
    throw ConfigError("vocabulary sizes must be positive");
  if (cfg.clique < 0) throw ConfigError("clique size must be non-negative");
  if (cfg.coauthor_overlap < 0.0 || cfg.coauthor_overlap > 1.0)
    throw ConfigError("coauthor overlap must lie in [0, 1]");

  Rng rng(seed);
  Corpus corpus;
  int paper_seq = 0;

  for (int g = 0; g < cfg.num_names; ++g) {
    const std::string display = "first" + std::to_string(g) + " last" + std::to_string(g);
    for (int r = 0; r < cfg.persons_per_name; ++r) {
      PersonRecord person;
      {
        char buf[16];
        std::snprintf(buf, sizeof buf, "a%04d", g * cfg.persons_per_name + r);
        person.id = buf;
      }
      person.name = display;
      const std::string tag = std::to_string(g) + "x" + std::to_string(r);

      std::vector<std::string> topic;
      for (int w = 0; w < cfg.topic_vocab; ++w)
        topic.push_back("t" + tag + "w" + std::to_string(w));
      const std::string affiliation = "inst" + tag + " laboratory";

      std::vector<std::string> clique;
      for (int s = 0; s < cfg.clique; ++s) {
        if (rng.bernoulli(cfg.coauthor_overlap))
          clique.push_back("gco" + std::to_string(g) + "s" + std::to_string(s) + " shared");
        else
          clique.push_back("pco" + tag + "s" + std::to_string(s) + " own");
      }
      const std::vector<std::string> venues = {"venue" + tag + "a", "venue" + tag + "b"};

      auto draw_word = [&]() -> std::string {
        if (rng.bernoulli(0.75)) return topic[rng.below(topic.size())];
        return "shw" + std::to_string(rng.below(static_cast<uint64_t>(cfg.shared_vocab)));
      };

      for (int t = 0; t < cfg.papers_per_person; ++t) {
        PaperRecord paper;
        {
          char buf[16];
          std::snprintf(buf, sizeof buf, "p%06d", paper_seq++);
          paper.id = buf;
        }
        std::string title;
        for (int w = 0; w < 8; ++w) {
          if (w) title.push_back(' ');
          title += draw_word();
        }
        paper.title = title;
        std::string abs;
        for (int w = 0; w < 5; ++w) {
          if (w) abs.push_back(' ');
          abs += draw_word();
        }
        paper.abstract = abs;
        paper.keywords = {topic[rng.below(topic.size())], topic[rng.below(topic.size())]};
        paper.venue = venues[rng.below(venues.size())];
        paper.year = 2000 + t;

        std::vector<AuthorSlot> coauthors;
        if (!clique.empty()) {
          std::vector<size_t> pool(clique.size());
          for (size_t i = 0; i < pool.size(); ++i) pool[i] = i;
          rng.shuffle(pool);
          size_t take = 2 + rng.below(3);  // 2..4 coauthors when available
          take = std::min(take, pool.size());
          for (size_t i = 0; i < take; ++i) coauthors.push_back({clique[pool[i]], ""});
        }
        AuthorSlot self{display, affiliation};
        size_t self_pos = rng.below(coauthors.size() + 1);
        coauthors.insert(coauthors.begin() + static_cast<long>(self_pos), self);
        paper.authors = std::move(coauthors);

        person.papers.push_back(paper.id);
        corpus.papers.emplace(paper.id, std::move(paper));
      }
      corpus.persons.emplace(person.id, std::move(person));
    }
  }
  rebuild_name_index(corpus);
  return corpus;
}

}  // namespace nameres
