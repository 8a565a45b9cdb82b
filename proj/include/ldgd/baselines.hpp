#pragma once

#include "ldgd/numerics.hpp"

namespace ldgd {

/// Probabilistic PCA: y = W x + mean + e, x ~ N(0, I), e ~ N(0, noise I).
struct PpcaModel {
  Matrix loadings;  // D x Q, column norms non-increasing
  double noise = 0.0;
  RowVector mean;   // 1 x D
  Vector eigenvalues;  // all D sample-covariance eigenvalues, descending

  [[nodiscard]] Index dims() const { return loadings.rows(); }
  [[nodiscard]] Index latent_dims() const { return loadings.cols(); }
};

/// Maximum-likelihood PPCA from the eigendecomposition of the sample
/// covariance. Each loading column's largest-magnitude entry is positive.
PpcaModel fit_ppca(const Matrix& y, Index q);

/// Posterior means (W^T W + noise I)^{-1} W^T (y - mean), N x Q.
Matrix ppca_project(const PpcaModel& model, const Matrix& y);

/// sum_i log N(y_i | mean, W W^T + noise I).
double ppca_log_likelihood(const PpcaModel& model, const Matrix& y);

/// Rows of y (N x D) as independent draws from N(0, W W^T + noise I).
double primal_log_likelihood(const Matrix& y, const Matrix& w, double noise);

/// Columns of y (N x D) as independent draws from N(0, X X^T + noise I).
double dual_log_likelihood(const Matrix& y, const Matrix& x, double noise);

}  // namespace ldgd
