#include "reference.hpp"

#include <cmath>

namespace nameres::ref {

std::vector<double> kernel_pool_scalar(const Mat<double>& S, const std::vector<double>& mu,
                                       const std::vector<double>& sigma,
                                       const std::vector<uint8_t>& row_mask,
                                       const std::vector<uint8_t>& col_mask, double eps) {
  const size_t K = mu.size();
  std::vector<double> phi(K, 0.0);

  int kept_rows = 0, kept_cols = 0;
  for (int i = 0; i < S.rows; ++i)
    if (row_mask.empty() || row_mask[static_cast<size_t>(i)]) ++kept_rows;
  for (int j = 0; j < S.cols; ++j)
    if (col_mask.empty() || col_mask[static_cast<size_t>(j)]) ++kept_cols;
  if (kept_rows == 0 || kept_cols == 0) return phi;

  for (size_t k = 0; k < K; ++k) {
    double acc = 0.0;
    for (int i = 0; i < S.rows; ++i) {
      if (!row_mask.empty() && !row_mask[static_cast<size_t>(i)]) continue;
      double row_sum = 0.0;
      for (int j = 0; j < S.cols; ++j) {
        if (!col_mask.empty() && !col_mask[static_cast<size_t>(j)]) continue;
        const double d = S.at(i, j) - mu[k];
        row_sum += std::exp(-(d * d) / (2.0 * sigma[k] * sigma[k]));
      }
      acc += std::log(row_sum + eps);
    }
    phi[k] = acc;
  }
  return phi;
}

Mat<double> cosine_scalar(const Mat<double>& A, const Mat<double>& B) {
  Mat<double> S(A.rows, B.rows);
  for (int i = 0; i < A.rows; ++i) {
    for (int j = 0; j < B.rows; ++j) {
      double dot = 0.0, na = 0.0, nb = 0.0;
      for (int d = 0; d < A.cols; ++d) {
        dot += A.at(i, d) * B.at(j, d);
        na += A.at(i, d) * A.at(i, d);
        nb += B.at(j, d) * B.at(j, d);
      }
      S.at(i, j) = (na == 0.0 || nb == 0.0) ? 0.0 : dot / (std::sqrt(na) * std::sqrt(nb));
    }
  }
  return S;
}

std::vector<double> attend_scalar(const std::vector<std::vector<double>>& phis,
                                  const std::vector<double>& w, double b) {
  const size_t F = phis.size();
  const size_t K = phis.front().size();
  std::vector<double> e(F);
  double mx = -1e300;
  for (size_t f = 0; f < F; ++f) {
    double l = b;
    for (size_t k = 0; k < K; ++k) l += w[k] * phis[f][k];
    e[f] = l;
    if (l > mx) mx = l;
  }
  double z = 0.0;
  for (size_t f = 0; f < F; ++f) {
    e[f] = std::exp(e[f] - mx);
    z += e[f];
  }
  std::vector<double> out(K, 0.0);
  for (size_t f = 0; f < F; ++f)
    for (size_t k = 0; k < K; ++k) out[k] += (e[f] / z) * phis[f][k];
  return out;
}

std::vector<double> mlp_forward_scalar(const MlpT<double>& m, const std::vector<double>& x) {
  std::vector<double> cur = x;
  for (int l = 0; l < m.layers(); ++l) {
    std::vector<double> next;
    for (int i = 0; i < m.W[static_cast<size_t>(l)].rows; ++i) {
      double acc = m.b[static_cast<size_t>(l)][static_cast<size_t>(i)];
      for (int j = 0; j < m.W[static_cast<size_t>(l)].cols; ++j)
        acc += m.W[static_cast<size_t>(l)].at(i, j) * cur[static_cast<size_t>(j)];
      if (l + 1 < m.layers() && acc < 0.0) acc = 0.0;
      next.push_back(acc);
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace nameres::ref
