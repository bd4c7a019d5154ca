#pragma once

#include <set>
#include <string>
#include <vector>

namespace nameres {

/// Ordered name parts, lowercased, punctuation removed. Produced only by
/// normalize_name so downstream comparisons are always like-for-like.
using NormalizedName = std::vector<std::string>;

/// Lowercases, strips punctuation ('-' and '.' and any other non-alphanumeric
/// character), splits on whitespace. "J.-P.  Martin" -> [jp, martin].
/// Throws DataError when nothing survives.
NormalizedName normalize_name(const std::string& raw);

/// Single-token surface form, parts joined by one space.
std::string joined(const NormalizedName& name);

/// Alternate writings of a personal name: the name itself, the rotation
/// (last part moved first), and both forms with every part but the last
/// reduced to its initial. [jing, zhang] -> {jing zhang, zhang jing,
/// j zhang, z jing}. Single-part names only yield themselves.
std::set<NormalizedName> name_variants(const NormalizedName& name);

/// Jaro-Winkler similarity in [0, 1]; prefix scale 0.1, prefix length
/// capped at 4. Used as a fallback matcher for corpora whose display names
/// rarely share exact variants.
double jaro_winkler(const std::string& a, const std::string& b);

}  // namespace nameres
