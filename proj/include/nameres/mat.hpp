#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace nameres {

/// Minimal row-major dense matrix; the compute kernels want contiguous rows
/// and nothing else.
template <class T>
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<T> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * static_cast<size_t>(c), T(0)) {}

  T* row(int i) { return a.data() + static_cast<size_t>(i) * static_cast<size_t>(cols); }
  const T* row(int i) const { return a.data() + static_cast<size_t>(i) * static_cast<size_t>(cols); }

  T& at(int i, int j) { return a[static_cast<size_t>(i) * static_cast<size_t>(cols) + static_cast<size_t>(j)]; }
  T at(int i, int j) const { return a[static_cast<size_t>(i) * static_cast<size_t>(cols) + static_cast<size_t>(j)]; }

  void zero() { a.assign(a.size(), T(0)); }
  bool empty() const { return rows == 0 || cols == 0; }
};

}  // namespace nameres
