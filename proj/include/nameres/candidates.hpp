#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nameres/types.hpp"

namespace nameres {

enum class CandidateMode { variants, jaro_winkler };

/// Persons that could own the target occurrence, in ascending person-id
/// order. Variant mode lists persons whose normalized display name equals
/// any variant of the target author's name; the Jaro-Winkler fallback lists
/// persons whose joined name scores above 0.5 against the target's.
std::vector<std::string> find_candidates(const Corpus& corpus, const TargetPair& target,
                                         CandidateMode mode = CandidateMode::variants);

/// Author slot in `paper` that names this person (variant match either way);
/// nullopt when the person does not appear.
std::optional<int> person_slot(const PaperRecord& paper, const std::string& display_name);

/// How decisively one candidate stands out on shared coauthors:
/// (max - second) / (max - min) over per-candidate counts of distinct
/// coauthor names shared with the target paper. Zero when max == min;
/// the second-largest counts duplicates, so a tie at the top gives zero.
/// Requires at least two candidates.
double same_coauthor_ratio(const Corpus& corpus, const TargetPair& target,
                           const std::vector<std::string>& candidates);

/// Per-candidate shared-coauthor counts feeding the ratio; exposed for the
/// feature table and diagnostics. Candidate profiles never include the
/// target's own paper.
std::vector<int> shared_coauthor_counts(const Corpus& corpus, const TargetPair& target,
                                        const std::vector<std::string>& candidates);

}  // namespace nameres
