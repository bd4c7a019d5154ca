#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nameres/mat.hpp"
#include "nameres/mlp.hpp"

// Plain serial implementations of the compute kernels, written as direct
// double loops with no shared code, caches, or OpenMP. The test suites use
// them as independent oracles and the bench target as the comparison
// baseline. Keep them boring.
namespace nameres::ref {

/// phi_k = sum over kept rows of log(sum over kept cols of
/// exp(-(S_ij - mu_k)^2 / (2 sigma_k^2)) + eps). No kept row or no kept
/// column gives the zero vector.
std::vector<double> kernel_pool_scalar(const Mat<double>& S, const std::vector<double>& mu,
                                       const std::vector<double>& sigma,
                                       const std::vector<uint8_t>& row_mask,
                                       const std::vector<uint8_t>& col_mask, double eps);

/// Cosine similarity of raw (unnormalized) row vectors; zero-norm rows
/// score zero.
Mat<double> cosine_scalar(const Mat<double>& A, const Mat<double>& B);

/// Softmax-weighted combination of the member vectors.
std::vector<double> attend_scalar(const std::vector<std::vector<double>>& phis,
                                  const std::vector<double>& w, double b);

/// Per-neuron forward pass of a rectified-linear stack with linear output.
std::vector<double> mlp_forward_scalar(const MlpT<double>& m, const std::vector<double>& x);

}  // namespace nameres::ref
