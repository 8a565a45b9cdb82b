#pragma once

#include <vector>

#include "ldgd/numerics.hpp"

namespace ldgd {

/// ARD squared-exponential kernel
///   k(x, x') = variance * exp(-1/2 sum_q alpha_q (x_q - x'_q)^2)
/// with alpha the inverse squared length-scales.
struct ArdKernel {
  double variance = 1.0;
  RowVector inv_lengthscales;

  ArdKernel() = default;
  ArdKernel(double variance, RowVector inv_lengthscales);

  [[nodiscard]] Index dims() const { return inv_lengthscales.size(); }
};

/// Scaled squared distances sum_q alpha_q (a_iq - b_jq)^2, computed through
/// the |u|^2 + |v|^2 - 2 u.v expansion and clamped at zero. Entries that
/// come out near zero are recomputed directly so identical rows give an
/// exact 0.
Matrix ard_sqdist(const Matrix& a, const Matrix& b, const RowVector& alpha);

/// P x R cross-covariance between the rows of a and b.
Matrix gram(const ArdKernel& kernel, const Matrix& a, const Matrix& b);

struct ArdSelection {
  std::vector<Index> dims;      // selected, ordered by descending alpha
  std::vector<double> sorted;   // all alphas, descending
  std::vector<Index> order;     // dimension index of each entry of `sorted`
};

/// Dimensions whose alpha is at least threshold_ratio * max alpha.
ArdSelection ard_report(const ArdKernel& kernel, double threshold_ratio = 0.2);

}  // namespace ldgd
