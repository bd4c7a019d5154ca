#pragma once

#include <map>
#include <string>
#include <vector>

namespace nameres {

/// The two token populations. Coauthor names and content words live in
/// disjoint vocabularies end to end.
enum class FieldTag { coauthors, content };

struct AuthorSlot {
  std::string name;
  std::string org;

  bool operator==(const AuthorSlot&) const = default;
};

struct PaperRecord {
  std::string id;
  std::string title;
  std::string abstract;
  std::vector<std::string> keywords;
  std::string venue;
  int year = 0;
  std::vector<AuthorSlot> authors;

  bool operator==(const PaperRecord&) const = default;
};

struct PersonRecord {
  std::string id;
  std::string name;
  std::vector<std::string> papers;  // profile, ordered

  bool operator==(const PersonRecord&) const = default;
};

/// One paper-author occurrence to be resolved.
struct TargetPair {
  std::string paper_id;
  int author_index = 0;

  bool operator==(const TargetPair&) const = default;
  auto operator<=>(const TargetPair&) const = default;
};

enum class GoldKind { person, nil };

/// A target plus its candidate persons and, when known, the gold assignment.
/// `gold_person` is meaningful only when `gold == GoldKind::person`.
struct CandidateSet {
  TargetPair target;
  std::vector<std::string> candidates;  // person ids, deterministic order
  GoldKind gold = GoldKind::person;
  std::string gold_person;
};

struct Corpus {
  std::map<std::string, PaperRecord> papers;
  std::map<std::string, PersonRecord> persons;
  /// normalized display name -> sorted person ids
  std::map<std::string, std::vector<std::string>> name_index;

  bool operator==(const Corpus& o) const {
    return papers == o.papers && persons == o.persons;
  }
};

}  // namespace nameres
