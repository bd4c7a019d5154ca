#pragma once

#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "nameres/types.hpp"

namespace nameres {

// Hard caps on the token lists a single side of a comparison may carry.
inline constexpr int kMaxNameTokens = 100;
inline constexpr int kMaxWordTokens = 500;
inline constexpr int kMaxProfilePapers = 100;

struct TokenizerConfig {
  bool stem = false;  // suffix stripping for content words, off unless asked for
};

/// One paper's token lists. `names` holds whole normalized author names
/// (one token per person); `words` holds lowercased content tokens with
/// stop words removed. The two lists feed disjoint vocabularies.
struct TokenLists {
  std::vector<std::string> names;
  std::vector<std::string> words;
};

/// Version 1 English stop-word list; mirrored in data/stopwords_en.txt.
const std::unordered_set<std::string>& stopwords();

/// Lowercases, drops punctuation in place, splits on whitespace, removes
/// stop words, optionally stems. Deterministic and idempotent with
/// stemming off.
std::vector<std::string> content_tokens(const std::string& text, const TokenizerConfig& cfg = {});

/// Tokenizes one paper. With `target_author_index` the coauthor list skips
/// that slot and the content words include that slot's affiliation; without
/// it every author name and every affiliation is kept (the form embedding
/// pre-training consumes). Lists are truncated to the module caps.
TokenLists tokenize_paper(const PaperRecord& paper, std::optional<int> target_author_index,
                          const TokenizerConfig& cfg = {});

/// Porter suffix stripping; lowercase ASCII input expected. Tokens with
/// non-letter characters pass through unchanged.
std::string porter_stem(const std::string& word);

}  // namespace nameres
