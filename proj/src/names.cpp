#include "nameres/names.hpp"

#include <algorithm>
#include <cctype>

#include "nameres/errors.hpp"

namespace nameres {

NormalizedName normalize_name(const std::string& raw) {
  NormalizedName parts;
  std::string cur;
  for (unsigned char c : raw) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (std::isspace(c)) {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    }
    // every other character (punctuation) is dropped in place
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  if (parts.empty()) throw DataError("name empty after normalization: \"" + raw + "\"");
  return parts;
}

std::string joined(const NormalizedName& name) {
  std::string out;
  for (size_t i = 0; i < name.size(); ++i) {
    if (i) out.push_back(' ');
    out += name[i];
  }
  return out;
}

namespace {

NormalizedName rotated(const NormalizedName& n) {
  NormalizedName r;
  r.push_back(n.back());
  r.insert(r.end(), n.begin(), n.end() - 1);
  return r;
}

NormalizedName initials_except_last(const NormalizedName& n) {
  NormalizedName r;
  for (size_t i = 0; i + 1 < n.size(); ++i) r.push_back(n[i].substr(0, 1));
  r.push_back(n.back());
  return r;
}

}  // namespace

std::set<NormalizedName> name_variants(const NormalizedName& name) {
  std::set<NormalizedName> out;
  out.insert(name);
  if (name.size() < 2) return out;
  NormalizedName rot = rotated(name);
  out.insert(rot);
  out.insert(initials_except_last(name));
  out.insert(initials_except_last(rot));
  return out;
}

double jaro_winkler(const std::string& a, const std::string& b) {
  const int la = static_cast<int>(a.size());
  const int lb = static_cast<int>(b.size());
  if (la == 0 && lb == 0) return 1.0;
  if (la == 0 || lb == 0) return 0.0;

  const int window = std::max(0, std::max(la, lb) / 2 - 1);
  std::vector<char> ma(la, 0), mb(lb, 0);
  int matches = 0;
  for (int i = 0; i < la; ++i) {
    int lo = std::max(0, i - window);
    int hi = std::min(lb - 1, i + window);
    for (int j = lo; j <= hi; ++j) {
      if (!mb[j] && a[i] == b[j]) {
        ma[i] = mb[j] = 1;
        ++matches;
        break;
      }
    }
  }
  if (matches == 0) return 0.0;

  int transpositions = 0;
  for (int i = 0, j = 0; i < la; ++i) {
    if (!ma[i]) continue;
    while (!mb[j]) ++j;
    if (a[i] != b[j]) ++transpositions;
    ++j;
  }
  transpositions /= 2;

  const double m = matches;
  const double jaro = (m / la + m / lb + (m - transpositions) / m) / 3.0;

  int prefix = 0;
  for (int i = 0; i < std::min({la, lb, 4}); ++i) {
    if (a[i] != b[i]) break;
    ++prefix;
  }
  return jaro + prefix * 0.1 * (1.0 - jaro);
}

}  // namespace nameres
