#include "ldgd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ldgd {

ArdKernel::ArdKernel(double variance_, RowVector inv_lengthscales_)
    : variance(variance_), inv_lengthscales(std::move(inv_lengthscales_)) {
  if (!(variance > 0.0)) throw InvalidArgument("ArdKernel: variance must be positive");
  if ((inv_lengthscales.array() <= 0.0).any()) throw InvalidArgument("ArdKernel: inverse length-scales must be positive");
}

Matrix ard_sqdist(const Matrix& a, const Matrix& b, const RowVector& alpha) {
  if (a.cols() != alpha.size() || b.cols() != alpha.size()) {
    throw InvalidArgument("ard_sqdist: inputs must have " + std::to_string(alpha.size()) + " columns");
  }
  const RowVector root = alpha.array().sqrt();
  const Matrix as = a.array().rowwise() * root.array();
  const Matrix bs = b.array().rowwise() * root.array();
  Matrix d = (-2.0 * as * bs.transpose()).eval();
  d.colwise() += as.rowwise().squaredNorm();
  d.rowwise() += bs.rowwise().squaredNorm().transpose();
  const double tiny = 1e-10;
  for (Index j = 0; j < d.cols(); ++j) {
    for (Index i = 0; i < d.rows(); ++i) {
      if (d(i, j) < tiny) {
        d(i, j) = ((a.row(i) - b.row(j)).array().square() * alpha.array()).sum();
      }
    }
  }
  if (&a == &b) d.triangularView<Eigen::StrictlyUpper>() = d.transpose();
  return d;
}

Matrix gram(const ArdKernel& kernel, const Matrix& a, const Matrix& b) {
  if (a.cols() != kernel.dims() || b.cols() != kernel.dims()) {
    throw InvalidArgument("gram: column count does not match kernel dimension " + std::to_string(kernel.dims()));
  }
  return kernel.variance * (-0.5 * ard_sqdist(a, b, kernel.inv_lengthscales)).array().exp();
}

ArdSelection ard_report(const ArdKernel& kernel, double threshold_ratio) {
  if (!(threshold_ratio > 0.0 && threshold_ratio <= 1.0)) {
    throw InvalidArgument("ard_report: threshold_ratio must be in (0, 1]");
  }
  ArdSelection out;
  const Index q = kernel.dims();
  out.order.resize(q);
  std::iota(out.order.begin(), out.order.end(), Index{0});
  std::stable_sort(out.order.begin(), out.order.end(), [&](Index x, Index y) {
    return kernel.inv_lengthscales(x) > kernel.inv_lengthscales(y);
  });
  if (q == 0) return out;
  const double cutoff = threshold_ratio * kernel.inv_lengthscales.maxCoeff();
  for (Index d : out.order) {
    out.sorted.push_back(kernel.inv_lengthscales(d));
    if (kernel.inv_lengthscales(d) >= cutoff) out.dims.push_back(d);
  }
  return out;
}

}  // namespace ldgd
