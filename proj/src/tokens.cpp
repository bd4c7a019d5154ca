#include "nameres/tokens.hpp"

#include <algorithm>
#include <cctype>

#include "nameres/names.hpp"

namespace nameres {

namespace {

bool is_vowel(const std::string& w, int i) {
  char c = w[static_cast<size_t>(i)];
  if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return true;
  // y acts as a vowel after a consonant
  return c == 'y' && i > 0 && !is_vowel(w, i - 1);
}

/// Count of vowel-consonant spans in w[0..len), the Porter measure.
int measure(const std::string& w, int len) {
  int m = 0;
  int i = 0;
  while (i < len && !is_vowel(w, i)) ++i;
  while (i < len) {
    while (i < len && is_vowel(w, i)) ++i;
    if (i < len) ++m;
    while (i < len && !is_vowel(w, i)) ++i;
  }
  return m;
}

bool has_vowel(const std::string& w, int len) {
  for (int i = 0; i < len; ++i)
    if (is_vowel(w, i)) return true;
  return false;
}

bool double_consonant(const std::string& w) {
  size_t n = w.size();
  if (n < 2 || w[n - 1] != w[n - 2]) return false;
  return !is_vowel(w, static_cast<int>(n) - 1);
}

/// consonant-vowel-consonant ending where the last consonant is not w, x, y.
bool cvc_end(const std::string& w, int len) {
  if (len < 3) return false;
  if (is_vowel(w, len - 1) || !is_vowel(w, len - 2) || is_vowel(w, len - 3)) return false;
  char c = w[static_cast<size_t>(len) - 1];
  return c != 'w' && c != 'x' && c != 'y';
}

bool ends_with(const std::string& w, const char* suf) {
  size_t n = std::char_traits<char>::length(suf);
  return w.size() >= n && w.compare(w.size() - n, n, suf) == 0;
}

/// Replace `suf` by `rep` when the preceding stem has measure > min_m.
bool replace_if(std::string& w, const char* suf, const char* rep, int min_m) {
  if (!ends_with(w, suf)) return false;
  int stem = static_cast<int>(w.size() - std::char_traits<char>::length(suf));
  if (measure(w, stem) <= min_m) return true;  // suffix matched, rule still consumes it
  w.resize(static_cast<size_t>(stem));
  w += rep;
  return true;
}

}  // namespace

std::string porter_stem(const std::string& word) {
  for (char c : word)
    if (c < 'a' || c > 'z') return word;
  if (word.size() <= 2) return word;
  std::string w = word;

  // step 1a
  if (ends_with(w, "sses")) {
    w.resize(w.size() - 2);
  } else if (ends_with(w, "ies")) {
    w.resize(w.size() - 2);
  } else if (!ends_with(w, "ss") && ends_with(w, "s")) {
    w.resize(w.size() - 1);
  }

  // step 1b
  if (ends_with(w, "eed")) {
    if (measure(w, static_cast<int>(w.size()) - 3) > 0) w.resize(w.size() - 1);
  } else {
    bool stripped = false;
    if (ends_with(w, "ed") && has_vowel(w, static_cast<int>(w.size()) - 2)) {
      w.resize(w.size() - 2);
      stripped = true;
    } else if (ends_with(w, "ing") && has_vowel(w, static_cast<int>(w.size()) - 3)) {
      w.resize(w.size() - 3);
      stripped = true;
    }
    if (stripped) {
      if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
        w += "e";
      } else if (double_consonant(w) && !ends_with(w, "l") && !ends_with(w, "s") &&
                 !ends_with(w, "z")) {
        w.resize(w.size() - 1);
      } else if (measure(w, static_cast<int>(w.size())) == 1 &&
                 cvc_end(w, static_cast<int>(w.size()))) {
        w += "e";
      }
    }
  }

  // step 1c
  if (ends_with(w, "y") && has_vowel(w, static_cast<int>(w.size()) - 1)) w.back() = 'i';

  // step 2
  static const std::pair<const char*, const char*> step2[] = {
      {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"}, {"anci", "ance"},
      {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},   {"entli", "ent"},
      {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
      {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
      {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"}};
  for (const auto& [suf, rep] : step2) {
    if (replace_if(w, suf, rep, 0)) break;
  }

  // step 3
  static const std::pair<const char*, const char*> step3[] = {
      {"icate", "ic"}, {"ative", ""}, {"alize", "al"},
      {"iciti", "ic"}, {"ical", "ic"}, {"ful", ""}, {"ness", ""}};
  for (const auto& [suf, rep] : step3) {
    if (replace_if(w, suf, rep, 0)) break;
  }

  // step 4
  static const char* step4[] = {"al",  "ance", "ence", "er",  "ic",  "able", "ible",
                                "ant", "ement", "ment", "ent", "ion", "ou",   "ism",
                                "ate", "iti",   "ous",  "ive", "ize"};
  for (const char* suf : step4) {
    if (!ends_with(w, suf)) continue;
    int stem = static_cast<int>(w.size() - std::char_traits<char>::length(suf));
    if (measure(w, stem) > 1) {
      if (std::string(suf) == "ion" && stem > 0 && w[static_cast<size_t>(stem) - 1] != 's' &&
          w[static_cast<size_t>(stem) - 1] != 't')
        break;
      w.resize(static_cast<size_t>(stem));
    }
    break;
  }

  // step 5a
  if (ends_with(w, "e")) {
    int stem = static_cast<int>(w.size()) - 1;
    int m = measure(w, stem);
    if (m > 1 || (m == 1 && !cvc_end(w, stem))) w.resize(static_cast<size_t>(stem));
  }
  // step 5b
  if (double_consonant(w) && ends_with(w, "l") && measure(w, static_cast<int>(w.size())) > 1)
    w.resize(w.size() - 1);

  return w;
}

std::vector<std::string> content_tokens(const std::string& text, const TokenizerConfig& cfg) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    if (!stopwords().count(cur)) out.push_back(cfg.stem ? porter_stem(cur) : cur);
    cur.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c))
      cur.push_back(static_cast<char>(std::tolower(c)));
    else if (std::isspace(c))
      flush();
    // punctuation is removed in place: "J.-P." -> "jp"
  }
  flush();
  return out;
}

TokenLists tokenize_paper(const PaperRecord& paper, std::optional<int> target_author_index,
                          const TokenizerConfig& cfg) {
  TokenLists out;
  for (size_t i = 0; i < paper.authors.size(); ++i) {
    if (target_author_index && static_cast<int>(i) == *target_author_index) continue;
    out.names.push_back(joined(normalize_name(paper.authors[i].name)));
    if (static_cast<int>(out.names.size()) >= kMaxNameTokens) break;
  }

  auto append = [&](const std::string& text) {
    if (static_cast<int>(out.words.size()) >= kMaxWordTokens) return;
    for (std::string& tok : content_tokens(text, cfg)) {
      out.words.push_back(std::move(tok));
      if (static_cast<int>(out.words.size()) >= kMaxWordTokens) return;
    }
  };
  append(paper.title);
  append(paper.abstract);
  for (const std::string& kw : paper.keywords) append(kw);
  append(paper.venue);
  if (target_author_index) {
    append(paper.authors[static_cast<size_t>(*target_author_index)].org);
  } else {
    for (const AuthorSlot& a : paper.authors) append(a.org);
  }
  return out;
}

}  // namespace nameres
