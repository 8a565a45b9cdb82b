#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ldgd/errors.hpp"

namespace ldgd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

/// Physicists' Gauss-Hermite rule: sum_l w_l g(z_l) ~ int exp(-z^2) g(z) dz.
struct QuadratureRule {
  std::vector<double> nodes;    // ascending
  std::vector<double> weights;  // positive, sum to sqrt(pi)

  [[nodiscard]] int order() const { return static_cast<int>(nodes.size()); }
};

/// Nodes from the eigenvalues of the symmetric tridiagonal Jacobi matrix
/// (Golub-Welsch), polished by Newton steps on the orthonormal Hermite
/// recurrence; weights from the Christoffel function. 1 <= order <= 100.
QuadratureRule gauss_hermite(int order);

struct CholeskyFactor {
  Matrix lower;
  double jitter_used = 0.0;
};

/// Factorizes mat + jitter*I. Tries jitter 0, then
/// max(base_jitter, 1e-6*mean(diag)), multiplying by 10 up to
/// 1e-2*mean(diag). Throws NumericalFailure naming the first non-positive
/// leading minor if every attempt fails.
CholeskyFactor cholesky_with_jitter(const Matrix& mat, double base_jitter);

/// log Phi(x) for the standard normal CDF; finite for every finite x.
double log_normal_cdf(double x);

/// d/dx log Phi(x) = phi(x) / Phi(x), stable in both tails.
double inverse_mills_ratio(double x);

double normal_cdf(double x);

/// Deterministic random source. Labeled substreams are derived from the
/// root seed and a label only, so adding a consumer never shifts another.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed);

  [[nodiscard]] RandomSource substream(std::string_view label) const;

  double normal();
  double uniform();
  /// Uniform integer in [0, n).
  Index index(Index n);
  Matrix normal_matrix(Index rows, Index cols);
  /// Fisher-Yates permutation of 0..n-1.
  std::vector<Index> permutation(Index n);

  [[nodiscard]] std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// splitmix64 finalizer; used for seed derivation.
std::uint64_t mix64(std::uint64_t x);

}  // namespace ldgd
