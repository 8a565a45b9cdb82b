#include "ldgd/likelihoods.hpp"

#include <cmath>
#include <numbers>

namespace ldgd {

namespace {
const double kLog2Pi = std::log(2.0 * std::numbers::pi);
}

double ell_regression(double y, double mean, double var, double noise) {
  const double r = y - mean;
  return -0.5 * (kLog2Pi + std::log(noise) + (r * r + var) / noise);
}

double ell_classification(int y, double mean, double var, const QuadratureRule& rule) {
  const double s = y == 1 ? 1.0 : -1.0;
  const double root = std::sqrt(2.0 * std::max(var, 0.0));
  const int n = rule.order();
  auto term = [&](int l) { return log_normal_cdf(s * (rule.nodes[l] * root + mean)); };
  // mirrored nodes are summed in pairs so flipping (y, mean) is exact
  double total = n % 2 == 1 ? rule.weights[n / 2] * term(n / 2) : 0.0;
  for (int l = 0; l < n / 2; ++l) total += rule.weights[l] * (term(l) + term(n - 1 - l));
  return total / std::sqrt(std::numbers::pi);
}

double class_probability(double mean, double var) { return normal_cdf(mean / std::sqrt(1.0 + std::max(var, 0.0))); }

namespace ad {

Var ell_regression_total(const Var& mean, const Matrix& y, const Var& log_noise, const Var& weighted_var) {
  Tape& t = *mean.tape();
  const Index b = mean.rows();
  if (y.rows() != b || y.cols() != mean.cols() || log_noise.cols() != mean.cols()) {
    throw InvalidArgument("ell_regression_total: shape mismatch");
  }
  Var inv_noise = exp(scale(log_noise, -1.0));
  Var resid = square(sub(t.constant(y), mean));
  Var fit = sum(hadamard(resid, broadcast_row(inv_noise, b)));
  Var logdet = scale(sum(log_noise), static_cast<double>(b));
  Var inner = add(add(fit, weighted_var), logdet);
  return scale(add_scalar(inner, static_cast<double>(b * mean.cols()) * kLog2Pi), -0.5);
}

Var ell_classification_total(const Var& mean, const Var& var, const Matrix& y, const QuadratureRule& rule) {
  const Matrix sign = (2.0 * y.array() - 1.0).matrix();
  return sum(probit_expected_log_lik(mean, var, sign, rule));
}

}  // namespace ad
}  // namespace ldgd
