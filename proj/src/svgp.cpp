#include "ldgd/svgp.hpp"

#include <cmath>

namespace ldgd {

namespace {

constexpr double kVarianceFloor = 1e-12;

Matrix whitened_cross(const SvgpPath& path, const Matrix& x, const CholeskyFactor& chol) {
  Matrix kmb = gram(path.kernel, path.inducing, x);
  chol.lower.triangularView<Eigen::Lower>().solveInPlace(kmb);
  return kmb;
}

void check_path(const SvgpPath& path, const Matrix& x) {
  const Index m = path.num_inducing();
  if (path.inducing.cols() != path.kernel.dims() || x.cols() != path.kernel.dims()) {
    throw InvalidArgument("svgp: latent dimension mismatch");
  }
  if (path.q_mean.rows() != m || static_cast<Index>(path.q_sqrt.size()) != path.q_mean.cols()) {
    throw InvalidArgument("svgp: variational parameter shape mismatch");
  }
}

}  // namespace

SvgpPath SvgpPath::prior(ArdKernel kernel, Matrix inducing, Index columns) {
  SvgpPath p;
  p.kernel = std::move(kernel);
  const Index m = inducing.rows();
  p.inducing = std::move(inducing);
  p.q_mean = Matrix::Zero(m, columns);
  p.q_sqrt.assign(static_cast<std::size_t>(columns), Matrix::Identity(m, m));
  return p;
}

CholeskyFactor inducing_cholesky(const SvgpPath& path) {
  Matrix kmm = gram(path.kernel, path.inducing, path.inducing);
  kmm.diagonal().array() += path.jitter;
  return cholesky_with_jitter(kmm, path.jitter);
}

PredictiveGaussian predictive(const SvgpPath& path, const Matrix& x) {
  check_path(path, x);
  const CholeskyFactor chol = inducing_cholesky(path);
  const Matrix a = whitened_cross(path, x, chol);
  const Vector deficit = (path.kernel.variance - a.colwise().squaredNorm().array()).max(0.0).matrix().transpose();
  PredictiveGaussian out;
  out.mean = a.transpose() * path.q_mean;
  out.variance.resize(x.rows(), path.num_columns());
  for (Index c = 0; c < path.num_columns(); ++c) {
    const Matrix v = path.q_sqrt[c].triangularView<Eigen::Lower>().transpose() * a;
    out.variance.col(c) = (deficit + v.colwise().squaredNorm().transpose()).cwiseMax(kVarianceFloor);
  }
  return out;
}

Matrix predictive_covariance(const SvgpPath& path, Index column, const Matrix& x) {
  check_path(path, x);
  if (column < 0 || column >= path.num_columns()) throw InvalidArgument("predictive_covariance: column out of range");
  const CholeskyFactor chol = inducing_cholesky(path);
  const Matrix a = whitened_cross(path, x, chol);
  const Matrix v = path.q_sqrt[column].triangularView<Eigen::Lower>().transpose() * a;
  Matrix cov = gram(path.kernel, x, x) - a.transpose() * a + v.transpose() * v;
  cov = 0.5 * (cov + cov.transpose()).eval();
  cov.diagonal() = cov.diagonal().cwiseMax(kVarianceFloor);
  return cov;
}

double kl_inducing(const SvgpPath& path) {
  const double m = static_cast<double>(path.num_inducing());
  double kl = 0.0;
  for (Index c = 0; c < path.num_columns(); ++c) {
    const Matrix& w = path.q_sqrt[c];
    const double frob = w.triangularView<Eigen::Lower>().toDenseMatrix().squaredNorm();
    kl += 0.5 * (path.q_mean.col(c).squaredNorm() + frob - m - 2.0 * w.diagonal().array().log().sum());
  }
  return kl;
}

namespace ad {

Projection project(const PathNodes& path, const Var& x) {
  Tape& t = *x.tape();
  const Index m = path.inducing.rows();
  Var kmm = ard_gram(path.inducing, path.inducing, path.variance, path.alpha);
  kmm = add(kmm, t.constant(Matrix::Identity(m, m) * path.jitter));
  Var l = cholesky(kmm, path.jitter);
  Var kmb = ard_gram(path.inducing, x, path.variance, path.alpha);
  Var a = tri_solve(l, kmb);
  Var norms = transpose(col_sums(square(a)));
  Var deficit = clamp_min(sub(broadcast_scalar(path.variance, x.rows(), 1), norms), 0.0);
  return {a, deficit};
}

Var predictive_mean(const PathNodes& path, const Projection& p) { return matmul_tn(p.a, path.q_mean); }

Var predictive_variance(const PathNodes& path, const Projection& p) {
  const Index c = path.q_mean.cols();
  Var quad = quad_form_cols(p.a, block_tril_expdiag(path.q_sqrt_raw, path.q_mean.rows()));
  return clamp_min(add(broadcast_col(p.deficit, c), quad), kVarianceFloor);
}

Var weighted_variance_total(const PathNodes& path, const Projection& p, const Var& weights) {
  Var sbar = weighted_tril_gram(path.q_sqrt_raw, weights);
  Var quad = sum(hadamard(p.a, matmul(sbar, p.a)));
  Var prior = hadamard(sum(p.deficit), sum(weights));
  return add(prior, quad);
}

Var kl_inducing(const PathNodes& path) {
  const double m = static_cast<double>(path.q_mean.rows());
  const double c = static_cast<double>(path.q_mean.cols());
  Var total = add(sum(square(path.q_mean)), tril_frobenius_logdet(path.q_sqrt_raw));
  return scale(add_scalar(total, -m * c), 0.5);
}

}  // namespace ad
}  // namespace ldgd
