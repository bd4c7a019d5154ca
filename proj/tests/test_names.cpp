#include <doctest.h>

#include <string>

#include "nameres/errors.hpp"
#include "nameres/names.hpp"
#include "nameres/rng.hpp"

using namespace nameres;

TEST_CASE("normalization lowercases, strips punctuation, splits on whitespace") {
  CHECK(normalize_name("J.-P.  Martin") == NormalizedName{"jp", "martin"});
  CHECK(normalize_name("Jing Zhang") == NormalizedName{"jing", "zhang"});
  CHECK(normalize_name("  O'Neil ") == NormalizedName{"oneil"});
  CHECK(normalize_name("LI wei") == NormalizedName{"li", "wei"});
  CHECK_THROWS_AS(normalize_name("..--.."), DataError);
  CHECK_THROWS_AS(normalize_name(""), DataError);
}

TEST_CASE("normalization is idempotent through the joined surface form") {
  for (const char* raw : {"Jing Zhang", "J.-P. Martin", "Wei-Li CHEN"}) {
    const NormalizedName once = normalize_name(raw);
    CHECK(normalize_name(joined(once)) == once);
  }
}

TEST_CASE("name variants cover rotation and initials") {
  const auto variants = name_variants(normalize_name("Jing Zhang"));
  CHECK(variants.size() == 4);
  CHECK(variants.count({"jing", "zhang"}) == 1);
  CHECK(variants.count({"zhang", "jing"}) == 1);
  CHECK(variants.count({"j", "zhang"}) == 1);
  CHECK(variants.count({"z", "jing"}) == 1);

  const auto single = name_variants(normalize_name("Cher"));
  CHECK(single.size() == 1);
  CHECK(single.count({"cher"}) == 1);
}

TEST_CASE("three-part variants shorten every part but the last") {
  const auto variants = name_variants(normalize_name("Juan Pablo Martin"));
  CHECK(variants.count({"juan", "pablo", "martin"}) == 1);
  CHECK(variants.count({"martin", "juan", "pablo"}) == 1);
  CHECK(variants.count({"j", "p", "martin"}) == 1);
  CHECK(variants.count({"m", "j", "pablo"}) == 1);
}

TEST_CASE("jaro-winkler reproduces the classic reference values") {
  CHECK(jaro_winkler("martha", "marhta") == doctest::Approx(0.9611).epsilon(1e-3));
  CHECK(jaro_winkler("dixon", "dicksonx") == doctest::Approx(0.8133).epsilon(1e-3));
  CHECK(jaro_winkler("dwayne", "duane") == doctest::Approx(0.84).epsilon(1e-3));
  CHECK(jaro_winkler("same", "same") == 1.0);
  CHECK(jaro_winkler("abc", "xyz") == 0.0);
  CHECK(jaro_winkler("", "abc") == 0.0);
  CHECK(jaro_winkler("", "") == 1.0);
}

TEST_CASE("jaro-winkler is symmetric and bounded on random strings") {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    std::string a, b;
    const size_t la = rng.below(10), lb = rng.below(10);
    for (size_t i = 0; i < la; ++i) a.push_back(static_cast<char>('a' + rng.below(6)));
    for (size_t i = 0; i < lb; ++i) b.push_back(static_cast<char>('a' + rng.below(6)));
    const double ab = jaro_winkler(a, b);
    CHECK(ab == jaro_winkler(b, a));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
  }
}
