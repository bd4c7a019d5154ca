#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "nameres/errors.hpp"
#include "nameres/mat.hpp"
#include "nameres/rng.hpp"

namespace nameres {

/// Fully connected stack with rectified-linear hidden layers and a linear
/// output layer. Layer l maps widths[l] -> widths[l+1] via y = W x + b.
template <class T>
struct MlpT {
  std::vector<int> widths;
  std::vector<Mat<T>> W;               // out x in
  std::vector<std::vector<T>> b;

  int input_width() const { return widths.empty() ? 0 : widths.front(); }
  int output_width() const { return widths.empty() ? 0 : widths.back(); }
  int layers() const { return static_cast<int>(W.size()); }

  static MlpT shaped(const std::vector<int>& widths) {
    if (widths.size() < 2) throw ConfigError("perceptron needs at least input and output widths");
    MlpT m;
    m.widths = widths;
    for (size_t l = 0; l + 1 < widths.size(); ++l) {
      if (widths[l] < 1 || widths[l + 1] < 1) throw ConfigError("perceptron widths must be positive");
      m.W.emplace_back(widths[l + 1], widths[l]);
      m.b.emplace_back(static_cast<size_t>(widths[l + 1]), T(0));
    }
    return m;
  }

  void init_xavier(Rng& rng) {
    for (Mat<T>& w : W) {
      const double bound = std::sqrt(6.0 / (w.rows + w.cols));
      for (T& x : w.a) x = static_cast<T>(rng.uniform(-bound, bound));
    }
    for (auto& layer : b)
      for (T& x : layer) x = T(0);
  }

  template <class U>
  MlpT<U> cast() const {
    MlpT<U> out;
    out.widths = widths;
    for (const Mat<T>& w : W) {
      Mat<U> c(w.rows, w.cols);
      for (size_t i = 0; i < w.a.size(); ++i) c.a[i] = static_cast<U>(w.a[i]);
      out.W.push_back(std::move(c));
    }
    for (const auto& layer : b) {
      std::vector<U> c(layer.size());
      for (size_t i = 0; i < layer.size(); ++i) c[i] = static_cast<U>(layer[i]);
      out.b.push_back(std::move(c));
    }
    return out;
  }
};

template <class T>
struct MlpCache {
  std::vector<std::vector<T>> act;  // act[0] = input, act[l+1] = output of layer l
};

template <class T>
std::vector<T> mlp_forward(const MlpT<T>& m, std::span<const T> x, MlpCache<T>* cache = nullptr) {
  if (static_cast<int>(x.size()) != m.input_width())
    throw DataError("perceptron input width mismatch");
  std::vector<T> cur(x.begin(), x.end());
  if (cache) {
    cache->act.clear();
    cache->act.push_back(cur);
  }
  for (int l = 0; l < m.layers(); ++l) {
    const Mat<T>& W = m.W[static_cast<size_t>(l)];
    std::vector<T> next(static_cast<size_t>(W.rows));
    for (int i = 0; i < W.rows; ++i) {
      const T* wi = W.row(i);
      T acc = m.b[static_cast<size_t>(l)][static_cast<size_t>(i)];
      for (int j = 0; j < W.cols; ++j) acc += wi[j] * cur[static_cast<size_t>(j)];
      next[static_cast<size_t>(i)] = acc;
    }
    if (l + 1 < m.layers())
      for (T& v : next) v = v > T(0) ? v : T(0);
    cur = std::move(next);
    if (cache) cache->act.push_back(cur);
  }
  return cur;
}

template <class T>
struct MlpGradT {
  std::vector<Mat<T>> W;
  std::vector<std::vector<T>> b;

  static MlpGradT shaped_like(const MlpT<T>& m) {
    MlpGradT g;
    for (const Mat<T>& w : m.W) g.W.emplace_back(w.rows, w.cols);
    for (const auto& layer : m.b) g.b.emplace_back(layer.size(), T(0));
    return g;
  }

  void add(const MlpGradT& o) {
    for (size_t l = 0; l < W.size(); ++l) {
      for (size_t i = 0; i < W[l].a.size(); ++i) W[l].a[i] += o.W[l].a[i];
      for (size_t i = 0; i < b[l].size(); ++i) b[l][i] += o.b[l][i];
    }
  }
};

/// Backpropagates dout; accumulates parameter gradients, returns dinput.
/// The cache must come from the matching forward call.
template <class T>
std::vector<T> mlp_backward(const MlpT<T>& m, const MlpCache<T>& cache, std::span<const T> dout,
                            MlpGradT<T>& grad) {
  std::vector<T> delta(dout.begin(), dout.end());
  for (int l = m.layers() - 1; l >= 0; --l) {
    const Mat<T>& W = m.W[static_cast<size_t>(l)];
    const std::vector<T>& in = cache.act[static_cast<size_t>(l)];
    if (l + 1 < m.layers()) {
      const std::vector<T>& out = cache.act[static_cast<size_t>(l) + 1];
      for (size_t i = 0; i < delta.size(); ++i)
        if (out[i] <= T(0)) delta[i] = T(0);
    }
    Mat<T>& dW = grad.W[static_cast<size_t>(l)];
    std::vector<T>& db = grad.b[static_cast<size_t>(l)];
    std::vector<T> dprev(static_cast<size_t>(W.cols), T(0));
    for (int i = 0; i < W.rows; ++i) {
      const T di = delta[static_cast<size_t>(i)];
      db[static_cast<size_t>(i)] += di;
      T* dwi = dW.row(i);
      const T* wi = W.row(i);
      for (int j = 0; j < W.cols; ++j) {
        dwi[j] += di * in[static_cast<size_t>(j)];
        dprev[static_cast<size_t>(j)] += di * wi[j];
      }
    }
    delta = std::move(dprev);
  }
  return delta;
}

}  // namespace nameres
