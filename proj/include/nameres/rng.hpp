#pragma once

#include <cstdint>
#include <string_view>
#include <utility>

namespace nameres {

/// Deterministic 64-bit generator (splitmix64). Standard-library
/// distributions are implementation-defined, so every sampling helper the
/// engine needs lives here; identical seeds give identical streams on any
/// platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Uniform integer in [0, n). Modulo bias is negligible at desk scale.
  uint64_t below(uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

  bool bernoulli(double p) { return next_double() < p; }

  /// Fisher-Yates; the stdlib shuffle order is implementation-defined.
  template <class V>
  void shuffle(V& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t state_;
};

/// Expands one root seed into independent per-stage seeds. FNV-1a over the
/// stage name mixed with the root through one splitmix round.
inline uint64_t derive_seed(uint64_t root, std::string_view stage) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : stage) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  Rng mix(root ^ h);
  return mix.next_u64();
}

}  // namespace nameres
