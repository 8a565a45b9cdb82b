#pragma once

#include "ldgd/autodiff.hpp"

namespace ldgd {

/// E_{f ~ N(mean, var)} log N(y | f, noise).
double ell_regression(double y, double mean, double var, double noise);

/// Gauss-Hermite estimate of E_{f ~ N(mean, var)} log Phi((2y-1) f).
double ell_classification(int y, double mean, double var, const QuadratureRule& rule);

/// P(y = 1) = Phi(mean / sqrt(1 + var)).
double class_probability(double mean, double var);

namespace ad {

/// Sum over every entry of the Gaussian expected log-likelihood.
/// mean is B x D, y the matching constant targets, log_noise 1 x D, and
/// weighted_var the total sum_{b,d} var_{b,d} / noise_d.
Var ell_regression_total(const Var& mean, const Matrix& y, const Var& log_noise, const Var& weighted_var);

/// Sum over every entry of the probit expected log-likelihood against 0/1
/// targets y (B x K).
Var ell_classification_total(const Var& mean, const Var& var, const Matrix& y, const QuadratureRule& rule);

}  // namespace ad
}  // namespace ldgd
