#include "ldgd/baselines.hpp"

#include <cmath>
#include <numbers>

namespace ldgd {

PpcaModel fit_ppca(const Matrix& y, Index q) {
  const Index n = y.rows();
  const Index d = y.cols();
  if (q < 1 || q >= d) throw InvalidArgument("fit_ppca: need 1 <= Q < D");
  if (n <= q) throw InvalidArgument("fit_ppca: need N > Q");
  PpcaModel model;
  model.mean = y.colwise().mean();
  const Matrix centered = y.rowwise() - model.mean;
  const Matrix cov = (centered.transpose() * centered) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalFailure("fit_ppca: eigendecomposition failed");
  const Vector vals = eig.eigenvalues().reverse();
  const Matrix vecs = eig.eigenvectors().rowwise().reverse();
  const double top = std::max(vals(0), 0.0);
  if (!(vals(q - 1) > 1e-12 * std::max(top, 1.0))) {
    throw NumericalFailure("fit_ppca: fewer than Q positive covariance eigenvalues");
  }
  model.eigenvalues = vals;
  const double discarded = vals.tail(d - q).cwiseMax(0.0).mean();
  model.noise = std::max(discarded, 1e-12 * std::max(top, 1e-300));
  model.loadings.resize(d, q);
  for (Index j = 0; j < q; ++j) {
    Vector u = vecs.col(j);
    Index k = 0;
    u.cwiseAbs().maxCoeff(&k);
    if (u(k) < 0.0) u = -u;
    model.loadings.col(j) = u * std::sqrt(std::max(vals(j) - model.noise, 0.0));
  }
  return model;
}

Matrix ppca_project(const PpcaModel& model, const Matrix& y) {
  if (y.cols() != model.dims()) throw InvalidArgument("ppca_project: dimension mismatch");
  const Matrix& w = model.loadings;
  Matrix m = w.transpose() * w;
  m.diagonal().array() += model.noise;
  const Matrix rhs = w.transpose() * (y.rowwise() - model.mean).transpose();
  return m.llt().solve(rhs).transpose();
}

namespace {

// sum over the columns of z (P x R) of log N(z_col | 0, cov), cov P x P.
double gaussian_columns_log_density(const Matrix& z, const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalFailure("log density: covariance not positive definite");
  const Matrix half = llt.matrixL().solve(z);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double p = static_cast<double>(z.rows());
  const double r = static_cast<double>(z.cols());
  return -0.5 * (r * p * std::log(2.0 * std::numbers::pi) + r * logdet + half.squaredNorm());
}

}  // namespace

double ppca_log_likelihood(const PpcaModel& model, const Matrix& y) {
  const Matrix centered = y.rowwise() - model.mean;
  return primal_log_likelihood(centered, model.loadings, model.noise);
}

double primal_log_likelihood(const Matrix& y, const Matrix& w, double noise) {
  if (w.rows() != y.cols()) throw InvalidArgument("primal_log_likelihood: W must have D rows");
  Matrix cov = w * w.transpose();
  cov.diagonal().array() += noise;
  return gaussian_columns_log_density(y.transpose(), cov);
}

double dual_log_likelihood(const Matrix& y, const Matrix& x, double noise) {
  if (x.rows() != y.rows()) throw InvalidArgument("dual_log_likelihood: X must have N rows");
  Matrix cov = x * x.transpose();
  cov.diagonal().array() += noise;
  return gaussian_columns_log_density(y, cov);
}

}  // namespace ldgd
