#pragma once

#include <vector>

#include "ldgd/autodiff.hpp"
#include "ldgd/kernels.hpp"

namespace ldgd {

/// One sparse variational GP path with C output columns sharing a kernel and
/// inducing inputs. q(u_c) = N(L m_c, L W_c W_c^T L^T) with L = chol(K_MM).
struct SvgpPath {
  ArdKernel kernel;
  Matrix inducing;              // M x Q
  Matrix q_mean;                // M x C, whitened means
  std::vector<Matrix> q_sqrt;   // C lower-triangular M x M factors
  double jitter = 1e-6;         // always added to the K_MM diagonal

  [[nodiscard]] Index num_inducing() const { return inducing.rows(); }
  [[nodiscard]] Index num_columns() const { return q_mean.cols(); }

  /// Prior-initialized path: m = 0, W = I.
  static SvgpPath prior(ArdKernel kernel, Matrix inducing, Index columns);
};

struct PredictiveGaussian {
  Matrix mean;      // B x C
  Matrix variance;  // B x C, clamped at 1e-12
};

/// Per-point predictive moments of every column at the rows of x.
PredictiveGaussian predictive(const SvgpPath& path, const Matrix& x);

/// Full B x B predictive covariance of one column.
Matrix predictive_covariance(const SvgpPath& path, Index column, const Matrix& x);

/// Sum over columns of KL(q(u_c) || p(u_c)) in whitened coordinates.
double kl_inducing(const SvgpPath& path);

/// Lower Cholesky factor of K_MM + jitter*I for the path.
CholeskyFactor inducing_cholesky(const SvgpPath& path);

namespace ad {

/// A path's parameters as tape nodes. q_sqrt_raw holds C square blocks side
/// by side (M x MC); each is read as lower triangular with a log diagonal.
struct PathNodes {
  Var variance;    // 1x1
  Var alpha;       // 1xQ
  Var inducing;    // MxQ
  Var q_mean;      // MxC
  Var q_sqrt_raw;  // Mx(MC)
  double jitter = 1e-6;
};

/// Whitened cross-covariance A = L^{-1} K_MB and the Nystrom deficit
/// diag(K_BB) - colnorms(A)^2, clamped at 0.
struct Projection {
  Var a;        // M x B
  Var deficit;  // B x 1
};

Projection project(const PathNodes& path, const Var& x);
/// B x C predictive means.
Var predictive_mean(const PathNodes& path, const Projection& p);
/// B x C predictive variances, clamped at 1e-12.
Var predictive_variance(const PathNodes& path, const Projection& p);
/// sum_{b,c} weight_c * var_{b,c} without forming the per-column variances.
Var weighted_variance_total(const PathNodes& path, const Projection& p, const Var& weights);
Var kl_inducing(const PathNodes& path);

}  // namespace ad
}  // namespace ldgd
