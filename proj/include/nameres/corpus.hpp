#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nameres/types.hpp"

namespace nameres {

/// Parses and validates a corpus. Rejects unknown keys, duplicate ids,
/// dangling paper references, negative years, and author names that are
/// empty after normalization. `abstract`, `keywords`, `venue`, and `org`
/// may be absent or empty; everything else is required.
Corpus load_corpus(std::istream& in, const std::string& source_name = "<stream>");
Corpus load_corpus_file(const std::string& path);

/// Canonical serialization: object keys sorted, papers and persons ordered
/// by id. load(save(c)) == c.
void save_corpus(const Corpus& corpus, std::ostream& out);
void save_corpus_file(const Corpus& corpus, const std::string& path);

/// Rebuilds the normalized-name index; called by the loaders and the
/// generators after any mutation of `persons`.
void rebuild_name_index(Corpus& corpus);

/// A target pair with its known owner; negatives and NIL cases are derived
/// later from the candidate sets.
struct TargetInstance {
  TargetPair target;
  std::string gold_person;
};

struct SplitResult {
  Corpus corpus;  // profiles trimmed to the retained papers; all papers kept
  std::vector<TargetInstance> train_targets;
  std::vector<TargetInstance> test_targets;
  int skipped_single_paper = 0;  // persons too small to hold out from
  int skipped_no_slot = 0;       // held-out papers without a matching author slot
};

/// Person-level test selection plus a per-person holdout of the most recent
/// papers. Every person's papers are ordered by (year, id); the latest
/// ceil(holdout * n) of them (capped at n-1) leave the profile and become
/// target instances, routed to train or test by the person draw.
SplitResult split_corpus(const Corpus& corpus, double person_test_fraction,
                         double paper_holdout_fraction, uint64_t seed);

struct SynthConfig {
  int num_names = 2;          // ambiguous names
  int persons_per_name = 2;
  int papers_per_person = 5;
  int topic_vocab = 20;       // per-person word pool
  int shared_vocab = 40;      // corpus-wide word pool
  int clique = 4;             // coauthor pool per person
  double coauthor_overlap = 0.0;  // chance a clique slot is shared within a name group
};

/// Planted disambiguation corpus: persons sharing a display name are told
/// apart by topic vocabulary and coauthor cliques. Deterministic for a
/// fixed seed, byte-identical after save_corpus.
Corpus gen_synthetic(const SynthConfig& cfg, uint64_t seed);

}  // namespace nameres
