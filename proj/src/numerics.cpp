#include "ldgd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ldgd {

namespace {

// Orthonormal Hermite polynomials w.r.t. exp(-x^2): returns p_{n-1}(x) and
// p_n(x).
std::pair<double, double> hermite_orthonormal(int n, double x) {
  double prev = 0.0;
  double cur = std::pow(std::numbers::pi, -0.25);
  for (int k = 0; k < n; ++k) {
    const double next = std::sqrt(2.0 / (k + 1)) * x * cur - std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
  }
  return {prev, cur};
}

// Manual Cholesky used only to locate the failing leading minor (1-based order).
Index first_bad_minor(const Matrix& a) {
  const Index n = a.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0)) return j + 1;
    l(j, j) = std::sqrt(d);
    for (Index i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  return -1;
}

// Q(t)/phi(t) for t > 0 via the Laplace continued fraction, evaluated
// bottom-up. Converges quickly for t >= 8.
double mills_ratio_tail(double t) {
  double frac = 0.0;
  for (int k = 60; k >= 1; --k) frac = k / (t + frac);
  return 1.0 / (t + frac);
}

constexpr double kTailSwitch = -8.0;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

}  // namespace

QuadratureRule gauss_hermite(int order) {
  if (order < 1 || order > 100) {
    throw InvalidArgument("gauss_hermite: order must be in [1, 100], got " + std::to_string(order));
  }
  const int n = order;
  Vector diag = Vector::Zero(n);
  Vector sub(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(k / 2.0);

  Vector nodes;
  if (n == 1) {
    nodes = Vector::Zero(1);
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    nodes = solver.eigenvalues();
  }

  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = nodes(i);
    for (int it = 0; it < 3; ++it) {
      auto [pm1, p] = hermite_orthonormal(n, x);
      const double dp = std::sqrt(2.0 * n) * pm1;
      if (dp == 0.0) break;
      x -= p / dp;
    }
    rule.nodes[i] = x;
  }
  // exact antisymmetry
  for (int i = 0; i < n / 2; ++i) {
    const double a = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
    rule.nodes[i] = -a;
    rule.nodes[n - 1 - i] = a;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;

  for (int i = 0; i < n; ++i) {
    auto [pm1, p] = hermite_orthonormal(n, rule.nodes[i]);
    (void)p;
    rule.weights[i] = 1.0 / (n * pm1 * pm1);
  }
  for (int i = 0; i < n / 2; ++i) {
    const double w = 0.5 * (rule.weights[i] + rule.weights[n - 1 - i]);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

CholeskyFactor cholesky_with_jitter(const Matrix& mat, double base_jitter) {
  if (mat.rows() != mat.cols()) throw InvalidArgument("cholesky_with_jitter: matrix is not square");
  if (base_jitter < 0.0) throw InvalidArgument("cholesky_with_jitter: base_jitter must be >= 0");
  const Index n = mat.rows();
  if (n == 0) return {Matrix(0, 0), 0.0};
  const double scale = mat.cwiseAbs().maxCoeff();
  if (!mat.allFinite()) throw NumericalFailure("cholesky_with_jitter: matrix has non-finite entries");
  if ((mat - mat.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(scale, 1.0)) {
    throw InvalidArgument("cholesky_with_jitter: matrix is not symmetric");
  }
  const double mean_diag = std::max(mat.diagonal().mean(), 0.0);
  const double max_jitter = 1e-2 * (mean_diag > 0.0 ? mean_diag : 1.0);

  std::vector<double> ladder{0.0};
  double j = base_jitter > 0.0 ? base_jitter : 1e-6 * (mean_diag > 0.0 ? mean_diag : 1.0);
  while (j <= max_jitter * (1.0 + 1e-12)) {
    ladder.push_back(j);
    j *= 10.0;
  }

  Matrix work = mat;
  for (double jitter : ladder) {
    work.diagonal() = mat.diagonal().array() + jitter;
    Eigen::LLT<Matrix> llt(work);
    if (llt.info() == Eigen::Success) {
      Matrix lower = llt.matrixL();
      if ((lower.diagonal().array() > 0.0).all()) return {std::move(lower), jitter};
    }
  }
  const Index bad = first_bad_minor(work);
  std::ostringstream msg;
  msg << "cholesky_with_jitter: matrix not positive definite at jitter " << ladder.back()
      << " (leading minor " << bad << ")";
  throw NumericalFailure(msg.str());
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_normal_cdf(double x) {
  if (x < kTailSwitch) {
    return -0.5 * x * x - kLogSqrt2Pi + std::log(mills_ratio_tail(-x));
  }
  if (x > 5.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
  return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
}

double inverse_mills_ratio(double x) {
  if (x < kTailSwitch) return 1.0 / mills_ratio_tail(-x);
  const double log_pdf = -0.5 * x * x - kLogSqrt2Pi;
  return std::exp(log_pdf - log_normal_cdf(x));
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomSource::RandomSource(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

RandomSource RandomSource::substream(std::string_view label) const {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return RandomSource(mix64(seed_ ^ mix64(h)));
}

double RandomSource::normal() { return normal_(engine_); }

double RandomSource::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

Index RandomSource::index(Index n) {
  if (n <= 0) throw InvalidArgument("RandomSource::index: n must be positive");
  return static_cast<Index>(std::uniform_int_distribution<std::int64_t>(0, n - 1)(engine_));
}

Matrix RandomSource::normal_matrix(Index rows, Index cols) {
  Matrix m(rows, cols);
  // row-major fill so the stream order matches the natural reading order
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = normal();
  return m;
}

std::vector<Index> RandomSource::permutation(Index n) {
  std::vector<Index> p(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) p[i] = i;
  for (Index i = n - 1; i > 0; --i) std::swap(p[i], p[index(i + 1)]);
  return p;
}

}  // namespace ldgd
