#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "nameres/errors.hpp"
#include "nameres/mat.hpp"

namespace nameres {

/// Additive guard inside the log of the pooling stage.
inline constexpr double kPoolEpsilon = 1e-10;

/// RBF kernel bank. The standard bank has one near-exact-match kernel
/// (mu = 1, sigma = 1e-3) and ten soft kernels of width 0.1 spread over
/// [-0.9, 0.9].
struct KernelBank {
  std::vector<double> mu;
  std::vector<double> sigma;

  int size() const { return static_cast<int>(mu.size()); }

  static KernelBank standard() {
    KernelBank b;
    b.mu = {1.0, 0.9, 0.7, 0.5, 0.3, 0.1, -0.1, -0.3, -0.5, -0.7, -0.9};
    b.sigma = {1e-3, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1};
    return b;
  }
};

/// S = A * B^T for unit-normalized row sets; rows of zero norm stay zero so
/// unknown tokens score 0 against everything.
template <class T>
Mat<T> similarity_from_units(const Mat<T>& A, const Mat<T>& B) {
  if (!A.empty() && !B.empty() && A.cols != B.cols)
    throw DataError("similarity operands disagree on dimension");
  Mat<T> S(A.rows, B.rows);
  const int d = A.cols;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < A.rows; ++i) {
    const T* ai = A.row(i);
    T* si = S.row(i);
    for (int j = 0; j < B.rows; ++j) {
      const T* bj = B.row(j);
      T acc = T(0);
      for (int k = 0; k < d; ++k) acc += ai[k] * bj[k];
      si[j] = acc;
    }
  }
  return S;
}

/// Per-row kernel sums kept from the forward pass; the backward pass reuses
/// them as the log denominators.
template <class T>
struct PoolCache {
  Mat<T> ksum;  // rows x K
};

namespace detail {
inline bool mask_on(std::span<const uint8_t> mask, int i) {
  return mask.empty() || mask[static_cast<size_t>(i)] != 0;
}
}  // namespace detail

///// Kernel pooling: phi_k = sum_i log(sum_j exp(-(S_ij - mu_k)^2 / (2 sigma_k^2)) + eps)
/// over unmasked rows and columns. A matrix with no usable row or column
/// pools to the zero vector (empty fields contribute nothing).
template <class T>
std::vector<T> kernel_pool(const Mat<T>& S, const KernelBank& bank,
                           std::span<const uint8_t> row_mask = {},
                           std::span<const uint8_t> col_mask = {},
                           PoolCache<T>* cache = nullptr) {
  const int K = bank.size();
  std::vector<T> phi(static_cast<size_t>(K), T(0));
  bool any_row = false, any_col = false;
  for (int i = 0; i < S.rows && !any_row; ++i) any_row = detail::mask_on(row_mask, i);
  for (int j = 0; j < S.cols && !any_col; ++j) any_col = detail::mask_on(col_mask, j);
  if (cache) cache->ksum = Mat<T>(S.rows, K);
  if (!any_row || !any_col) return phi;

  Mat<T> local;
  Mat<T>& ksum = cache ? cache->ksum : local;
  if (!cache) ksum = Mat<T>(S.rows, K);

#pragma omp parallel for schedule(static)
  for (int i = 0; i < S.rows; ++i) {
    if (!detail::mask_on(row_mask, i)) continue;
    const T* si = S.row(i);
    T* out = ksum.row(i);
    for (int k = 0; k < K; ++k) {
      const T mu = static_cast<T>(bank.mu[static_cast<size_t>(k)]);
      const T inv2s2 =
          static_cast<T>(1.0 / (2.0 * bank.sigma[static_cast<size_t>(k)] * bank.sigma[static_cast<size_t>(k)]));
      T acc = T(0);
      for (int j = 0; j < S.cols; ++j) {
        if (!detail::mask_on(col_mask, j)) continue;
        const T d = si[j] - mu;
        acc += std::exp(-d * d * inv2s2);
      }
      out[k] = acc;
    }
  }
  // fixed-order reduction over rows keeps the result independent of threads
  for (int i = 0; i < S.rows; ++i) {
    if (!detail::mask_on(row_mask, i)) continue;
    const T* ks = ksum.row(i);
    for (int k = 0; k < K; ++k)
      phi[static_cast<size_t>(k)] += std::log(ks[k] + static_cast<T>(kPoolEpsilon));
  }
  return phi;
}

/// dS from upstream dphi; exponentials are recomputed, denominators come
/// from the forward cache.
template <class T>
Mat<T> kernel_pool_backward(const Mat<T>& S, const KernelBank& bank, const PoolCache<T>& cache,
                            std::span<const T> dphi, std::span<const uint8_t> row_mask = {},
                            std::span<const uint8_t> col_mask = {}) {
  const int K = bank.size();
  Mat<T> dS(S.rows, S.cols);
  bool any_col = false;
  for (int j = 0; j < S.cols && !any_col; ++j) any_col = detail::mask_on(col_mask, j);
  if (!any_col) return dS;

#pragma omp parallel for schedule(static)
  for (int i = 0; i < S.rows; ++i) {
    if (!detail::mask_on(row_mask, i)) continue;
    const T* si = S.row(i);
    const T* ks = cache.ksum.row(i);
    T* di = dS.row(i);
    for (int k = 0; k < K; ++k) {
      const T up = dphi[static_cast<size_t>(k)];
      if (up == T(0)) continue;
      const T mu = static_cast<T>(bank.mu[static_cast<size_t>(k)]);
      const T s2 = static_cast<T>(bank.sigma[static_cast<size_t>(k)] * bank.sigma[static_cast<size_t>(k)]);
      const T denom = ks[k] + static_cast<T>(kPoolEpsilon);
      const T scale = up / denom;
      for (int j = 0; j < S.cols; ++j) {
        if (!detail::mask_on(col_mask, j)) continue;
        const T d = si[j] - mu;
        di[j] += scale * std::exp(-d * d / (T(2) * s2)) * (-d / s2);
      }
    }
  }
  return dS;
}

template <class T>
struct AttnParamsT {
  std::vector<T> w;  // one weight per pooled component
  T b = T(0);
};

template <class T>
struct AttendCache {
  std::vector<T> weights;  // softmax over member logits
};

/// Convex combination of pooled vectors; member weights come from a softmax
/// over w . phi + b. Max-subtraction keeps the exponentials bounded.
template <class T>
std::vector<T> attend(const std::vector<std::vector<T>>& phis, const AttnParamsT<T>& params,
                      AttendCache<T>* cache = nullptr) {
  if (phis.empty()) throw DataError("attention over an empty member list");
  const size_t K = phis.front().size();
  std::vector<T> logits(phis.size());
  for (size_t f = 0; f < phis.size(); ++f) {
    T l = params.b;
    for (size_t k = 0; k < K; ++k) l += params.w[k] * phis[f][k];
    logits[f] = l;
  }
  T mx = logits[0];
  for (T l : logits) mx = std::max(mx, l);
  T z = T(0);
  for (T& l : logits) {
    l = std::exp(l - mx);
    z += l;
  }
  std::vector<T> weights(phis.size());
  for (size_t f = 0; f < phis.size(); ++f) weights[f] = logits[f] / z;

  std::vector<T> pooled(K, T(0));
  for (size_t f = 0; f < phis.size(); ++f)
    for (size_t k = 0; k < K; ++k) pooled[k] += weights[f] * phis[f][k];
  if (cache) cache->weights = std::move(weights);
  return pooled;
}

/// Gradients of attend. dphis must be pre-sized to match phis; dw/db
/// accumulate in place so one parameter set can serve several call sites.
template <class T>
void attend_backward(const std::vector<std::vector<T>>& phis, const AttnParamsT<T>& params,
                     const AttendCache<T>& cache, std::span<const T> dpooled,
                     std::vector<std::vector<T>>& dphis, AttnParamsT<T>& dparams) {
  const size_t K = phis.front().size();
  const std::vector<T>& alpha = cache.weights;

  std::vector<T> s(phis.size());
  T mean = T(0);
  for (size_t f = 0; f < phis.size(); ++f) {
    T acc = T(0);
    for (size_t k = 0; k < K; ++k) acc += dpooled[k] * phis[f][k];
    s[f] = acc;
    mean += alpha[f] * acc;
  }
  for (size_t f = 0; f < phis.size(); ++f) {
    const T dlogit = alpha[f] * (s[f] - mean);
    for (size_t k = 0; k < K; ++k) {
      dphis[f][k] += alpha[f] * dpooled[k] + dlogit * params.w[k];
      dparams.w[k] += dlogit * phis[f][k];
    }
    dparams.b += dlogit;
  }
}

}  // namespace nameres
